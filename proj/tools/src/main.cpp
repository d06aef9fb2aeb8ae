#include <iostream>

#include "qkdsim_cli/cli.hpp"

int main(int argc, char** argv) {
  return qkdsim::cli::main_with_args(argc, argv, std::cout, std::cerr);
}
