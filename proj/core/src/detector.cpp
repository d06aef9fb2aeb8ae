#include "qkdsim/detector.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qkdsim {

namespace {
constexpr double kPlanck = 6.62607015e-34;
constexpr double kLightSpeed = 299792458.0;

double photon_energy_joule(double wavelength_nm) {
  return kPlanck * kLightSpeed / (wavelength_nm * 1e-9);
}
}  // namespace

void DetectorParams::validate() const {
  if (!(efficiency >= 0.0 && efficiency <= 1.0)) {
    throw std::invalid_argument("efficiency must be in [0, 1]");
  }
  if (!(dark_prob_per_slot >= 0.0 && dark_prob_per_slot < 1.0)) {
    throw std::invalid_argument("dark_prob_per_slot must be in [0, 1)");
  }
  if (dead_time_slots < 0) throw std::invalid_argument("dead_time_slots must be >= 0");
  if (!(blind_threshold_photons >= 100.0)) {
    throw std::invalid_argument("blind_threshold_photons must be >= 100");
  }
  if (recovery_slots < 1) throw std::invalid_argument("recovery_slots must be >= 1");
}

DetectorUnit::DetectorUnit(int detector_id, DetectorParams params)
    : id_(detector_id), params_(params) {
  params_.validate();
}

double DetectorUnit::dim_click_probability(double incident_mean) {
  if (incident_mean == 0.0) return params_.dark_prob_per_slot;
  if (incident_mean != cached_incident_) {
    cached_incident_ = incident_mean;
    // P(no photon detected and no dark count)
    const double none =
        std::exp(-incident_mean * params_.efficiency) * (1.0 - params_.dark_prob_per_slot);
    cached_probability_ = 1.0 - none;
  }
  return cached_probability_;
}

std::int64_t DetectorUnit::ready_from() const {
  if (const auto* b = std::get_if<Blinded>(&state_)) {
    return b->last_bright_slot + params_.recovery_slots;
  }
  if (const auto* d = std::get_if<Dead>(&state_)) return d->until_slot;
  return last_slot_ + 1;
}

double DetectorUnit::ready_click_probability(double incident_mean) const {
  if (incident_mean == 0.0) return params_.dark_prob_per_slot;
  return 1.0 - std::exp(-incident_mean * params_.efficiency) * (1.0 - params_.dark_prob_per_slot);
}

double DetectorUnit::arm(double incident_mean, std::int64_t slot) {
  if (slot <= last_slot_) {
    throw std::invalid_argument("detector " + std::to_string(id_) + ": slot " +
                                std::to_string(slot) + " not after previous slot " +
                                std::to_string(last_slot_));
  }
  if (!(incident_mean >= 0.0)) {
    throw std::invalid_argument("detector " + std::to_string(id_) +
                                ": negative or NaN incident mean at slot " +
                                std::to_string(slot));
  }
  last_slot_ = slot;
  pending_slot_ = slot;
  pending_ = Pending::none;

  if (incident_mean >= params_.blind_threshold_photons) {
    if (const auto* d = std::get_if<Dead>(&state_); d && slot >= d->until_slot) state_ = Ready{};
    if (std::holds_alternative<Ready>(state_)) {
      pending_ = Pending::edge;
      state_ = Blinded{slot};
      return 1.0;
    }
    // Output already high (latched or still in its dead-time pulse): no edge.
    state_ = Blinded{slot};
    return 0.0;
  }

  if (const auto* b = std::get_if<Blinded>(&state_)) {
    if (slot - b->last_bright_slot >= params_.recovery_slots) state_ = Ready{};
  } else if (const auto* d = std::get_if<Dead>(&state_)) {
    if (slot >= d->until_slot) state_ = Ready{};
  }
  if (!std::holds_alternative<Ready>(state_)) return 0.0;

  pending_ = Pending::dim;
  return dim_click_probability(incident_mean);
}

std::optional<ClickEvent> DetectorUnit::settle(bool fired) {
  const Pending p = pending_;
  pending_ = Pending::none;
  switch (p) {
    case Pending::edge:
      return ClickEvent{id_, pending_slot_};
    case Pending::dim:
      if (!fired) return std::nullopt;
      state_ = Dead{pending_slot_ + params_.dead_time_slots};
      return ClickEvent{id_, pending_slot_};
    case Pending::none:
      if (fired) {
        throw std::logic_error("detector " + std::to_string(id_) +
                               ": click reported for a slot that cannot click");
      }
      return std::nullopt;
  }
  return std::nullopt;
}

std::optional<ClickEvent> DetectorUnit::step(double incident_mean, std::int64_t slot,
                                             Rng& rng) {
  const double p = arm(incident_mean, slot);
  bool fired = false;
  if (p >= 1.0) {
    fired = true;
  } else if (p > 0.0) {
    fired = uniform01(rng) < p;
  }
  return settle(fired);
}

std::vector<CountRatePoint> count_rate_sweep(const DetectorParams& params,
                                             std::span<const double> powers,
                                             std::int64_t slots_per_point, double clock_hz,
                                             Rng& rng) {
  if (slots_per_point < 10'000) {
    throw std::invalid_argument("count_rate_sweep: slots_per_point must be >= 1e4");
  }
  for (std::size_t i = 1; i < powers.size(); ++i) {
    if (powers[i] < powers[i - 1]) {
      throw std::invalid_argument("count_rate_sweep: powers must be sorted ascending");
    }
  }
  const std::int64_t warmup = params.dead_time_slots + params.recovery_slots + 1;
  std::vector<CountRatePoint> out;
  out.reserve(powers.size());
  for (const double power : powers) {
    DetectorUnit unit(0, params);
    std::int64_t clicks = 0;
    for (std::int64_t s = 0; s < warmup + slots_per_point; ++s) {
      if (unit.step(power, s, rng) && s >= warmup) ++clicks;
    }
    out.push_back({power, clock_hz * static_cast<double>(clicks) /
                              static_cast<double>(slots_per_point)});
  }
  return out;
}

double photons_to_dBm(double photons_per_slot, double clock_hz, double wavelength_nm) {
  if (!(photons_per_slot > 0.0 && clock_hz > 0.0 && wavelength_nm > 0.0)) {
    throw std::invalid_argument("photons_to_dBm: arguments must be positive");
  }
  const double watts = photons_per_slot * clock_hz * photon_energy_joule(wavelength_nm);
  return 10.0 * std::log10(watts / 1e-3);
}

double dBm_to_photons(double dBm, double clock_hz, double wavelength_nm) {
  if (!(clock_hz > 0.0 && wavelength_nm > 0.0)) {
    throw std::invalid_argument("dBm_to_photons: clock and wavelength must be positive");
  }
  const double watts = 1e-3 * std::pow(10.0, dBm / 10.0);
  return watts / (clock_hz * photon_energy_joule(wavelength_nm));
}

}  // namespace qkdsim
