#include "qkdsim_cli/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "qkdsim/attack.hpp"
#include "qkdsim/detector.hpp"
#include "qkdsim/rng.hpp"
#include "qkdsim/scenario.hpp"

namespace qkdsim::cli {

namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

void check_written(std::ofstream& f, const fs::path& path) {
  f.close();
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

// Runs `body` with the selected stream (stdout or a file).
template <class Body>
void with_output(const std::string& path, std::ostream& out, Body&& body) {
  if (path.empty() || path == "-") {
    body(out);
    return;
  }
  auto f = open_out(path);
  body(f);
  check_written(f, path);
}

// Maps errors to exit codes: 1 for config and I/O problems.
template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return 1;
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream ss;
  ss << std::setprecision(precision) << v;
  return ss.str();
}

std::string fmt_opt(const std::optional<double>& v, int precision = 4) {
  return v ? fmt(*v, precision) : "n/a";
}

}  // namespace

ScenarioConfig resolve_config(const ConfigSource& src) {
  ScenarioConfig cfg = src.preset ? preset(*src.preset) : ScenarioConfig{};
  if (src.config_path) cfg = scenario_from_json(read_file(*src.config_path), cfg);
  for (const auto& o : src.overrides) apply_override(cfg, o);
  if (src.seed) cfg.seed = *src.seed;
  if (src.slots) {
    cfg.n_slots = *src.slots;
    try {
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("n_slots", e.what());
    }
  }
  return cfg;
}

std::string format_report(const ScenarioConfig& cfg, const RunMetrics& m) {
  std::ostringstream r;
  r << "slots            " << cfg.n_slots << " (" << fmt(cfg.n_slots / cfg.clock_hz) << " s)\n";
  r << "attack           "
    << (cfg.attack.enabled ? "on, attacked_fraction " + fmt(cfg.attack.attacked_fraction) : "off")
    << '\n';
  r << "count rates cps  ";
  for (std::size_t i = 0; i < 4; ++i) r << (i ? ", " : "") << fmt(m.count_rates_cps[i], 6);
  r << '\n';
  r << "coincidences     A " << m.coincidences[0] << ", B " << m.coincidences[1] << '\n';
  r << "CCR measured     A " << fmt_opt(m.ccr_pair_A) << ", B " << fmt_opt(m.ccr_pair_B) << '\n';
  r << "CCR estimate     " << fmt(m.ccr_est) << '\n';
  r << "attack fraction  " << fmt_opt(m.attack_fraction_est) << '\n';
  r << "QBER             " << fmt_opt(m.qber) << '\n';
  r << "sifted key       " << m.K_sift << " bits\n";
  r << "secure key       " << m.K_sec << " bits\n";
  r << "decision         " << (m.abort ? "ABORT: " + m.abort_reason : "accept") << '\n';
  return r.str();
}

int cmd_run(const RunOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ScenarioConfig cfg = resolve_config(opt.source);
    for (const auto& w : cfg.attack.enabled ? cfg.attack.warnings(cfg.detectors)
                                            : std::vector<std::string>{}) {
      err << "warning: " << w << '\n';
    }
    const RunResult res = run_scenario(cfg);

    const fs::path dir(opt.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());

    {
      const auto p = dir / "metrics.json";
      auto f = open_out(p);
      f << metrics_to_json(res.metrics) << '\n';
      check_written(f, p);
    }
    if (opt.emit_clicks) {
      const auto p = dir / "clicks.csv";
      auto f = open_out(p);
      write_click_csv(f, res.log);
      check_written(f, p);
    }
    const std::string report = format_report(cfg, res.metrics);
    {
      const auto p = dir / "report.txt";
      auto f = open_out(p);
      f << report;
      check_written(f, p);
    }
    out << report;
    return (opt.fail_on_abort && res.metrics.abort) ? 2 : 0;
  });
}

int cmd_sweep_power(const SweepPowerOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!(opt.min_dBm < opt.max_dBm)) {
      throw ConfigError("min-dbm", "must be below --max-dbm");
    }
    if (opt.points < 3) throw ConfigError("points", "must be >= 3");
    const ScenarioConfig cfg = resolve_config(opt.source);

    std::vector<double> dbm(static_cast<std::size_t>(opt.points));
    std::vector<double> photons(dbm.size());
    for (std::size_t k = 0; k < dbm.size(); ++k) {
      dbm[k] = opt.min_dBm + (opt.max_dBm - opt.min_dBm) * static_cast<double>(k) /
                                 static_cast<double>(dbm.size() - 1);
      photons[k] = dBm_to_photons(dbm[k], cfg.clock_hz, cfg.wavelength_nm);
    }
    std::array<std::vector<CountRatePoint>, 4> curves;
    const std::uint64_t base = stream_seed(cfg.seed, Stream::detectors);
    for (std::size_t d = 0; d < 4; ++d) {
      Rng rng(mix_seed(base, d));
      curves[d] = count_rate_sweep(cfg.detectors[d], photons, opt.slots_per_point, cfg.clock_hz, rng);
    }
    with_output(opt.out_csv, out, [&](std::ostream& os) {
      os << "power_dBm,detector_id,count_rate_cps\n";
      os << std::setprecision(10);
      for (std::size_t k = 0; k < dbm.size(); ++k) {
        for (std::size_t d = 0; d < 4; ++d) {
          os << dbm[k] << ',' << d + 1 << ',' << curves[d][k].clicks_per_second << '\n';
        }
      }
    });
    return 0;
  });
}

int cmd_explain(const ConfigSource& src, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ScenarioConfig cfg = resolve_config(src);
    out << scenario_to_json(cfg) << '\n';

    KeyRateInputs in;
    in.K_sift = 1;
    in.mu = cfg.mu;
    in.T = cfg.transmittance();
    in.eta = cfg.mean_efficiency();
    in.e = cfg.expected_qber;
    in.f_e = cfg.ec_efficiency;
    in.CCR_est = ccr_estimate(in.mu, in.T, in.eta, cfg.mean_dark_prob());
    in.CCR_exp = in.CCR_est;
    std::string why;
    const auto s = secure_fraction(in, &why);
    err << "T = " << fmt(in.T) << ", eta = " << fmt(in.eta) << ", d = " << fmt(cfg.mean_dark_prob())
        << '\n';
    err << "ccr_est = " << fmt(in.CCR_est, 3) << '\n';
    err << "secure_fraction(e = " << fmt(in.e) << ") = " << (s ? fmt(*s) : "undefined (" + why + ")")
        << '\n';
    return 0;
  });
}

int cmd_dump_program(const DumpProgramOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ScenarioConfig cfg = resolve_config(opt.source);
    const AliceRecord alice =
        alice_emit(cfg.n_slots, cfg.mu, cfg.alice_mode, stream_seed(cfg.seed, Stream::alice));
    EveMeasurement eve;
    if (cfg.attack.mode == AttackMode::intercept_resend) {
      eve = eve_measure(alice, stream_seed(cfg.seed, Stream::eve));
    }
    const PassThrough channel{&alice, db_to_transmittance(cfg.channel_loss_dB), cfg.wavelength_nm};
    AttackConfig attack = cfg.attack;
    if (!attack.enabled) err << "note: attack.enabled is false; dumping the program anyway\n";
    const PulseProgram program =
        assemble_attack_program(eve, attack, channel, stream_seed(cfg.seed, Stream::attack_cycles));
    with_output(opt.out_csv, out, [&](std::ostream& os) { write_program_csv(os, program); });
    return 0;
  });
}

int main_with_args(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Monte Carlo simulator of a DPS-QKD link under a detector blinding attack"};
  app.require_subcommand(1);

  auto add_source = [](CLI::App* sub, ConfigSource& src) {
    sub->add_option("config", src.config_path, "Scenario JSON file");
    sub->add_option("--preset", src.preset, "normal | full-attack | partial-attack");
    sub->add_option("--set", src.overrides, "Override key.path=value (repeatable)");
    sub->add_option("--seed", src.seed, "Run seed");
    sub->add_option("--slots", src.slots, "Number of time slots");
  };

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Simulate a scenario and write metrics");
  add_source(run_cmd, run.source);
  run_cmd->add_option("--out", run.out_dir, "Output directory");
  run_cmd->add_flag("--emit-clicks", run.emit_clicks, "Also write clicks.csv");
  run_cmd->add_flag("--fail-on-abort", run.fail_on_abort, "Exit 2 when the run aborts");

  SweepPowerOptions sweep;
  auto* sweep_cmd = app.add_subcommand("sweep-power", "Count rate versus incident power");
  add_source(sweep_cmd, sweep.source);
  sweep_cmd->add_option("--out", sweep.out_csv, "CSV path (default stdout)");
  sweep_cmd->add_option("--min-dbm", sweep.min_dBm, "Lowest power");
  sweep_cmd->add_option("--max-dbm", sweep.max_dBm, "Highest power");
  sweep_cmd->add_option("--points", sweep.points, "Number of powers (>= 3)");
  sweep_cmd->add_option("--slots-per-point", sweep.slots_per_point, "Slots simulated per power");

  ConfigSource explain;
  auto* explain_cmd = app.add_subcommand("explain", "Print the resolved config and estimates");
  add_source(explain_cmd, explain);

  DumpProgramOptions dump;
  auto* dump_cmd = app.add_subcommand("dump-program", "Write Eve's pulse program as CSV");
  add_source(dump_cmd, dump.source);
  dump_cmd->add_option("--out", dump.out_csv, "CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  if (*run_cmd) return cmd_run(run, out, err);
  if (*sweep_cmd) return cmd_sweep_power(sweep, out, err);
  if (*explain_cmd) return cmd_explain(explain, out, err);
  return cmd_dump_program(dump, out, err);
}

}  // namespace qkdsim::cli
