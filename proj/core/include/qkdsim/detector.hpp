#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "qkdsim/rng.hpp"

namespace qkdsim {

/// One SSPD. The blinding threshold is on the mean photon number incident on
/// this detector in one slot (after the pair coupler).
struct DetectorParams {
  double efficiency = 0.10;
  double dark_prob_per_slot = 1e-7;
  std::int64_t dead_time_slots = 50;
  double blind_threshold_photons = 2.5e4;
  std::int64_t recovery_slots = 8;

  void validate() const;
  friend bool operator==(const DetectorParams&, const DetectorParams&) = default;
};

struct Ready {
  friend bool operator==(Ready, Ready) = default;
};
struct Dead {
  std::int64_t until_slot = 0;
  friend bool operator==(Dead, Dead) = default;
};
struct Blinded {
  std::int64_t last_bright_slot = 0;
  friend bool operator==(Blinded, Blinded) = default;
};
using DetectorState = std::variant<Ready, Dead, Blinded>;

struct ClickEvent {
  int detector_id = 1;  // 1..4
  std::int64_t slot = 0;

  /// Log order: by slot, ties by detector id.
  friend auto operator<=>(const ClickEvent& a, const ClickEvent& b) {
    if (auto c = a.slot <=> b.slot; c != 0) return c;
    return a.detector_id <=> b.detector_id;
  }
  friend bool operator==(const ClickEvent&, const ClickEvent&) = default;
};

/// Sequential SSPD state machine.
///
/// A slot is processed in two halves so that several units can share one
/// random draw: arm() applies every deterministic transition and returns the
/// probability that this slot produces a click (0 when Dead/Blinded, 1 for a
/// bright rising edge); settle() commits the outcome. step() does both with
/// its own draw.
class DetectorUnit {
 public:
  DetectorUnit(int detector_id, DetectorParams params);

  double arm(double incident_mean, std::int64_t slot);
  std::optional<ClickEvent> settle(bool fired);

  std::optional<ClickEvent> step(double incident_mean, std::int64_t slot, Rng& rng);

  /// Earliest slot at which dim light finds this unit Ready.
  std::int64_t ready_from() const;
  /// Click probability a Ready unit would have for dim `incident_mean`.
  double ready_click_probability(double incident_mean) const;

  const DetectorState& state() const { return state_; }
  const DetectorParams& params() const { return params_; }
  int id() const { return id_; }

 private:
  double dim_click_probability(double incident_mean);

  enum class Pending { none, edge, dim };

  int id_;
  DetectorParams params_;
  DetectorState state_{Ready{}};
  std::int64_t last_slot_ = -1;
  std::int64_t pending_slot_ = -1;
  Pending pending_ = Pending::none;
  double cached_incident_ = -1.0;
  double cached_probability_ = 0.0;
};

struct CountRatePoint {
  double photons_per_slot = 0.0;
  double clicks_per_second = 0.0;
};

/// Continuous illumination at each power. Each point starts from Ready and
/// discards a warm-up of dead_time + recovery + 1 slots before counting, so
/// the reported rate is the steady-state rate (the single rising-edge click
/// of a blinded detector is not counted).
std::vector<CountRatePoint> count_rate_sweep(const DetectorParams& params,
                                             std::span<const double> powers,
                                             std::int64_t slots_per_point, double clock_hz,
                                             Rng& rng);

/// Average optical power of a pulse stream, in dBm.
double photons_to_dBm(double photons_per_slot, double clock_hz, double wavelength_nm);
double dBm_to_photons(double dBm, double clock_hz, double wavelength_nm);

}  // namespace qkdsim
