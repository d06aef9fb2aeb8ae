#include "qkdsim/optics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qkdsim {

double CouplerModel::ratio(double wavelength_nm) const {
  const double r = 0.5 + ratio_slope_per_nm * (wavelength_nm - center_wavelength_nm);
  return std::clamp(r, 0.0, 1.0);
}

bool BandpassFilter::in_band(double wavelength_nm) const {
  return std::abs(wavelength_nm - center_nm) <= 0.5 * width_nm;
}

void BandpassFilter::validate() const {
  if (!(width_nm > 0.0) || !std::isfinite(width_nm)) {
    throw std::invalid_argument("width_nm must be > 0");
  }
  if (!(out_of_band_suppression_dB >= 0.0)) {
    throw std::invalid_argument("out_of_band_suppression_dB must be >= 0");
  }
}

double db_to_transmittance(double loss_dB) { return std::pow(10.0, -loss_dB / 10.0); }

double wrap_phase(double phase) {
  double w = std::fmod(phase, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

double interference_cos(double delta_phase) {
  if (delta_phase == 0.0) return 1.0;
  if (delta_phase == kPi || delta_phase == -kPi) return -1.0;
  const double w = wrap_phase(delta_phase);
  if (w == 0.0) return 1.0;
  if (w == kPi) return -1.0;
  return std::cos(w);
}

SlotField attenuate(SlotField field, double loss_dB) {
  if (!std::isfinite(loss_dB)) {
    throw std::invalid_argument("attenuate: loss_dB must be finite");
  }
  if (loss_dB < 0.0) {
    throw std::invalid_argument("attenuate: negative loss (" + std::to_string(loss_dB) +
                                " dB) would be gain");
  }
  field.mean_photons *= db_to_transmittance(loss_dB);
  return field;
}

SlotField apply_bandpass(SlotField field, const BandpassFilter& filter) {
  if (!filter.enabled || filter.in_band(field.wavelength_nm)) return field;
  field.mean_photons *= db_to_transmittance(filter.out_of_band_suppression_dB);
  return field;
}

PortIntensities mzi_interfere(double current_phase, double previous_phase,
                              double interfering_mean) {
  const double c = interference_cos(current_phase - previous_phase);
  return {interfering_mean * (1.0 + c) / 2.0, interfering_mean * (1.0 - c) / 2.0};
}

PortIntensities mzi_interfere(const SlotField& current, const SlotField& previous) {
  const double a = current.mean_photons;
  const double b = previous.mean_photons;
  if (a == b) {
    return mzi_interfere(current.phase, previous.phase, a);
  }
  // |sqrt(a) e^{i phi_c} +- sqrt(b) e^{i phi_p}|^2 / 4
  const double cross = 2.0 * std::sqrt(a * b) * interference_cos(current.phase - previous.phase);
  const double sum = a + b;
  return {std::max(0.0, (sum + cross) / 4.0), std::max(0.0, (sum - cross) / 4.0)};
}

SplitIntensities coupler_split(double port_mean, double wavelength_nm,
                               const CouplerModel& coupler) {
  const double r = coupler.ratio(wavelength_nm);
  const double a = r * port_mean;
  return {a, port_mean - a};
}

}  // namespace qkdsim
