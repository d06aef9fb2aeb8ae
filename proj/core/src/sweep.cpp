#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include "qkdsim/engine.hpp"
#include "qkdsim/rng.hpp"
#include "qkdsim/scenario.hpp"

namespace qkdsim {

std::uint64_t sweep_child_seed(std::uint64_t base_seed, std::size_t index) {
  return mix_seed(base_seed, static_cast<std::uint64_t>(index));
}

unsigned sweep_threads_from_env() {
  if (const char* env = std::getenv("QKDSIM_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

std::vector<RunMetrics> run_sweep(const ScenarioConfig& base, const std::string& axis,
                                  std::span<const double> values, unsigned threads) {
  if (values.empty()) throw std::invalid_argument("run_sweep: no values");

  // Build every child config up front so a bad axis or value fails before any run.
  std::vector<ScenarioConfig> configs;
  configs.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    ScenarioConfig c = base;
    set_numeric(c, axis, values[i]);
    c.seed = sweep_child_seed(base.seed, i);
    configs.push_back(std::move(c));
  }

  if (threads == 0) threads = sweep_threads_from_env();
  threads = std::min<unsigned>(threads, static_cast<unsigned>(configs.size()));

  std::vector<RunMetrics> out(configs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        out[i] = run_scenario(configs[i]).metrics;
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace qkdsim
