#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qkdsim/detector.hpp"
#include "qkdsim/rng.hpp"

namespace qkdsim {

enum class AliceMode { random, static_0pi };

/// Streams Alice's {0, pi} modulation as bits (1 = pi). Random mode consumes
/// one 64-bit draw per 64 slots; static mode alternates 0, pi, 0, pi.
class AlicePhaseStream {
 public:
  AlicePhaseStream(AliceMode mode, std::uint64_t seed);
  std::uint8_t next();

 private:
  AliceMode mode_;
  Rng rng_;
  std::uint64_t word_ = 0;
  int remaining_ = 0;
  std::uint64_t index_ = 0;
};

struct AliceRecord {
  std::vector<std::uint8_t> phase_bits;  // 0 -> phase 0, 1 -> phase pi
  double mean_photons_per_pulse = 0.2;

  std::size_t size() const { return phase_bits.size(); }
  double phase(std::size_t slot) const;
  /// Bit carried by slot s >= 1: 0 for dphi = 0, 1 for dphi = pi.
  std::uint8_t bit(std::size_t slot) const { return phase_bits[slot] ^ phase_bits[slot - 1]; }
};

AliceRecord alice_emit(std::int64_t n_slots, double mu, AliceMode mode, std::uint64_t seed);

struct ClickLog {
  std::vector<ClickEvent> events;

  /// Sorted by slot, ties by detector id.
  bool is_ordered() const;
};

void write_click_csv(std::ostream& os, const ClickLog& log);
ClickLog read_click_csv(std::istream& is);

enum class Pair { A = 0, B = 1 };  // A = {Det1, Det2} on port 1, B = {Det3, Det4} on port 2

constexpr int port_of(int detector_id) { return detector_id <= 2 ? 1 : 2; }

struct SiftResult {
  std::vector<std::uint8_t> alice_bits;
  std::vector<std::uint8_t> bob_bits;
  std::vector<std::int64_t> kept_slots;
  std::array<std::int64_t, 2> coincidence_counts{};
  /// Same-pair coincidences whose port disagrees with Alice's bit.
  std::array<std::int64_t, 2> coincidence_errors{};
  /// Clicks in single-click key slots, per detector (index 0 = Det1).
  std::array<std::int64_t, 4> singles_counts{};
  /// Clicks (not slots) in slots where both ports fired.
  std::int64_t discarded_multiport = 0;
  /// Clicks at slot 0, which has no predecessor phase.
  std::int64_t excluded_slot0 = 0;

  std::int64_t sifted_length() const { return static_cast<std::int64_t>(kept_slots.size()); }
  /// Clicks of one detector including its coincident clicks.
  std::int64_t detector_clicks(int detector_id) const;
};

/// Incremental sifter: feed the clicks of each slot in increasing slot order.
class SiftAccumulator {
 public:
  /// detector_mask bit (id-1) set for each detector that clicked in `slot`.
  void add_slot(std::int64_t slot, std::uint8_t alice_bit, unsigned detector_mask);
  const SiftResult& result() const { return result_; }
  SiftResult take() { return std::move(result_); }

 private:
  SiftResult result_;
  std::int64_t last_slot_ = -1;
};

/// Throws std::invalid_argument if a click lies beyond Alice's record or the
/// log is out of order.
SiftResult sift(const AliceRecord& alice, const ClickLog& log);

/// Error rate over every port-resolved detection: single-click key bits plus
/// same-pair coincidences (both detectors name the same port). nullopt when
/// there is nothing to compare.
std::optional<double> qber(const SiftResult& result);

/// (1/4) mu T eta + d.
double ccr_estimate(double mu, double T, double eta, double d);

/// 2 N_coinc / (N_a + N_b) for the pair; nullopt when the pair never clicked.
std::optional<double> ccr_measure(const SiftResult& result, Pair pair);

struct KeyRateInputs {
  std::int64_t K_sift = 0;
  double mu = 0.2;
  double T = 1.0;
  double eta = 0.1;
  double e = 0.0;
  double f_e = 1.16;
  double CCR_exp = 0.0;
  double CCR_est = 0.0;

  void validate() const;
};

struct KeyLength {
  std::int64_t length = 0;
  std::optional<double> secure_fraction;  // nullopt when the bound is undefined
  std::string abort_reason;               // empty when the bound was evaluated
};

/// Binary entropy with h(0) = h(1) = 0.
double binary_entropy(double e);

/// Secure fraction per sifted bit:
///   (1 - 2 mu (1 - eta T)) * (-log2(1 - e^2 - (1 - 6e)^2 / 2))
///   - f(e) h(e) - (CCR_exp - CCR_est)
/// nullopt (with reason) when e >= 1/6 or the log argument is not positive.
std::optional<double> secure_fraction(const KeyRateInputs& in, std::string* reason = nullptr);

KeyLength secure_key_length(const KeyRateInputs& in);

/// clamp((CCR_exp - CCR_est) / (1 - CCR_est), 0, 1); nullopt when CCR_est == 1.
std::optional<double> attack_fraction_estimate(double ccr_exp, double ccr_est);

struct PairBalance {
  double z = 0.0;
  bool flagged = false;
};

/// Two-sided binomial test of each pair's singles against a 50:50 split.
/// Requires at least 100 single clicks in total.
std::array<PairBalance, 2> detector_statistics_check(const SiftResult& result,
                                                     double tolerance_sigma);

}  // namespace qkdsim
