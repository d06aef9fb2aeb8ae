#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qkdsim/engine.hpp"

namespace qkdsim::cli {

/// Where a scenario comes from. Layers, in order: preset (or built-in
/// defaults), JSON file, `--set` overrides, then --seed / --slots.
struct ConfigSource {
  std::optional<std::string> config_path;
  std::optional<std::string> preset;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> slots;
};

/// Throws ConfigError on bad input and std::runtime_error on unreadable files.
ScenarioConfig resolve_config(const ConfigSource& src);

struct RunOptions {
  ConfigSource source;
  std::string out_dir = ".";
  bool emit_clicks = false;
  bool fail_on_abort = false;
};

struct SweepPowerOptions {
  ConfigSource source;
  std::string out_csv;  // empty or "-" writes to stdout
  double min_dBm = -70.0;
  double max_dBm = -20.0;
  int points = 51;
  std::int64_t slots_per_point = 100'000;
};

struct DumpProgramOptions {
  ConfigSource source;
  std::string out_csv;  // empty or "-" writes to stdout
};

int cmd_run(const RunOptions& opt, std::ostream& out, std::ostream& err);
int cmd_sweep_power(const SweepPowerOptions& opt, std::ostream& out, std::ostream& err);
/// Resolved config JSON on `out`; implied estimates on `err`.
int cmd_explain(const ConfigSource& src, std::ostream& out, std::ostream& err);
int cmd_dump_program(const DumpProgramOptions& opt, std::ostream& out, std::ostream& err);

/// Human-readable summary written to report.txt.
std::string format_report(const ScenarioConfig& cfg, const RunMetrics& m);

/// Full argument parsing and dispatch; returns the process exit code.
int main_with_args(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qkdsim::cli
