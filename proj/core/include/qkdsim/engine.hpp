#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qkdsim/attack.hpp"
#include "qkdsim/detector.hpp"
#include "qkdsim/optics.hpp"
#include "qkdsim/protocol.hpp"

namespace qkdsim {

/// Interferometer-imperfection knob calibrated so the default link shows a
/// QBER of about 3.2 % (with the default 100 cps dark rate contributing ~0.1 %).
inline constexpr double kCalibratedPhaseFlipProb = 0.031;

/// Complete description of one experiment. Defaults describe the 1 GHz
/// normal-operation link: mu = 0.2, 18 dB channel, 2 dB receiver insertion
/// loss, four SSPDs with 10 % efficiency.
struct ScenarioConfig {
  double clock_hz = 1e9;
  std::int64_t n_slots = 1'000'000;
  double mu = 0.2;
  double channel_loss_dB = 18.0;
  /// Bob's interferometer + coupler insertion loss; applies to all light
  /// entering Bob, Eve's included.
  double receiver_loss_dB = 2.0;
  double wavelength_nm = 1551.0;
  /// Probability that Bob's inferred bit of a single-click key event is
  /// flipped by interferometer imperfection.
  double phase_flip_prob = kCalibratedPhaseFlipProb;
  /// Error-correction inefficiency f(e).
  double ec_efficiency = 1.16;
  /// attack_fraction_est above this aborts the run.
  double alarm_threshold = 0.01;
  /// QBER assumed by `explain` when evaluating the secure fraction.
  double expected_qber = 0.032;
  BandpassFilter filter;
  CouplerModel coupler;
  std::array<DetectorParams, 4> detectors{};
  AttackConfig attack;
  AliceMode alice_mode = AliceMode::random;
  std::uint64_t seed = 1;

  /// Channel and receiver transmittance combined (T).
  double transmittance() const;
  double mean_efficiency() const;
  double mean_dark_prob() const;
  /// Throws std::invalid_argument whose message starts with the dotted key
  /// path of the offending field.
  void validate() const;
  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

struct RunMetrics {
  std::optional<double> qber;
  std::optional<double> ccr_pair_A;
  std::optional<double> ccr_pair_B;
  double ccr_est = 0.0;
  std::array<double, 4> count_rates_cps{};
  std::array<std::int64_t, 4> singles{};
  std::array<std::int64_t, 2> coincidences{};
  std::int64_t K_sift = 0;
  std::int64_t K_sec = 0;
  std::optional<double> attack_fraction_est;
  bool abort = false;
  std::string abort_reason;
};

struct RunResult {
  ClickLog log;
  SiftResult sift;
  RunMetrics metrics;
};

struct EngineOptions {
  /// Jump between clicks while every detector is Ready under Alice's light.
  /// Same distribution as per-slot stepping, different random stream.
  bool skip_ahead = true;
};

/// Slot-by-slot simulation of the link. Deterministic in (cfg, options).
RunResult run_scenario(const ScenarioConfig& cfg, const EngineOptions& options = {});

/// Post-processing shared by run_scenario and offline analysis of a log.
RunMetrics compute_metrics(const ScenarioConfig& cfg, const ClickLog& log, const SiftResult& sift);

/// Pair whose CCR drives the attack estimate: the one with more coincidences
/// (ties broken by total clicks, then pair A).
Pair monitored_pair(const SiftResult& sift);

/// Seed of sweep run `index`.
std::uint64_t sweep_child_seed(std::uint64_t base_seed, std::size_t index);

/// One independent run per value of `axis` (a numeric config path such as
/// "mu" or "attack.attacked_fraction"; "detectors.*.x" sets all four).
/// Results are in `values` order for any thread count. threads == 0 reads
/// QKDSIM_THREADS (default: hardware concurrency).
std::vector<RunMetrics> run_sweep(const ScenarioConfig& base, const std::string& axis,
                                  std::span<const double> values, unsigned threads = 0);

/// Thread cap from QKDSIM_THREADS, falling back to hardware concurrency.
unsigned sweep_threads_from_env();

}  // namespace qkdsim
