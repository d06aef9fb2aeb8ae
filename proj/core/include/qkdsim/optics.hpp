#pragma once

#include <cstdint>
#include <numbers>

namespace qkdsim {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Optical state of one clock slot. All light, weak or bright, is carried as
/// a mean photon number; photon statistics enter only at the detector.
struct SlotField {
  std::int64_t slot = 0;
  double mean_photons = 0.0;
  double phase = 0.0;  // radians
  double wavelength_nm = 1551.0;

  friend bool operator==(const SlotField&, const SlotField&) = default;
};

/// Mean photons per slot at the two interferometer outputs, before the
/// per-port couplers.
struct PortIntensities {
  double port1_mean = 0.0;
  double port2_mean = 0.0;
};

/// The pair split behind one output port.
struct SplitIntensities {
  double det_a_mean = 0.0;
  double det_b_mean = 0.0;
};

/// Wavelength-dependent splitter in front of a detector pair. The ratio is
/// linear in detuning and clamped to [0, 1]; exactly 0.5 at the center.
struct CouplerModel {
  double center_wavelength_nm = 1551.0;
  double ratio_slope_per_nm = 0.0;

  double ratio(double wavelength_nm) const;
  friend bool operator==(const CouplerModel&, const CouplerModel&) = default;
};

struct BandpassFilter {
  bool enabled = true;
  double center_nm = 1551.0;
  double width_nm = 2.0;
  double out_of_band_suppression_dB = 40.0;

  bool in_band(double wavelength_nm) const;
  void validate() const;
  friend bool operator==(const BandpassFilter&, const BandpassFilter&) = default;
};

/// 10^(-dB/10).
double db_to_transmittance(double loss_dB);

/// Wraps to [0, 2*pi).
double wrap_phase(double phase);

/// cos of a phase difference, exact (+1 / -1) for differences that are
/// multiples of pi.
double interference_cos(double delta_phase);

/// Scales mean_photons by 10^(-loss_dB/10). Throws std::invalid_argument for
/// negative or non-finite loss.
SlotField attenuate(SlotField field, double loss_dB);

SlotField apply_bandpass(SlotField field, const BandpassFilter& filter);

/// Equal-amplitude 1-bit-delay interference: port1 = m(1+cos dphi)/2,
/// port2 = m(1-cos dphi)/2.
PortIntensities mzi_interfere(double current_phase, double previous_phase,
                              double interfering_mean);

/// General form for consecutive fields of unequal amplitude. Each pulse is
/// split by the input coupler; the output slot carries half of the current
/// and half of the delayed previous pulse, so the two ports sum to
/// (m_cur + m_prev) / 2. Pass a zero-mean previous field for the first slot
/// of a run (interference with vacuum).
PortIntensities mzi_interfere(const SlotField& current, const SlotField& previous);

SplitIntensities coupler_split(double port_mean, double wavelength_nm,
                               const CouplerModel& coupler);

}  // namespace qkdsim
