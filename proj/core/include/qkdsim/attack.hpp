#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "qkdsim/detector.hpp"
#include "qkdsim/optics.hpp"
#include "qkdsim/protocol.hpp"

namespace qkdsim {

enum class AttackMode { emulation, intercept_resend };

/// Output port of Bob's interferometer; none = no light routed / no outcome.
enum class Port : std::uint8_t { none = 0, port1 = 1, port2 = 2 };

constexpr Port other_port(Port p) {
  return p == Port::port1 ? Port::port2 : p == Port::port2 ? Port::port1 : Port::none;
}

/// Tailored bright-illumination program parameters. blind_photons_per_slot is
/// referenced at Bob's receiver input, where Eve's light replaces the channel
/// output.
struct AttackConfig {
  bool enabled = false;
  AttackMode mode = AttackMode::emulation;
  double blind_photons_per_slot = 8.0e4;
  std::int64_t blinding_slots = 9990;
  std::int64_t recovery_window_slots = 10;
  double attacked_fraction = 1.0;
  double blind_wavelength_nm = 1551.0;

  std::int64_t cycle_slots() const { return blinding_slots + recovery_window_slots; }
  void validate() const;
  /// Non-fatal problems, e.g. a recovery window shorter than a detector's
  /// recovery time (the attack then fails, which is a legitimate scenario).
  std::vector<std::string> warnings(std::span<const DetectorParams> detectors) const;
  friend bool operator==(const AttackConfig&, const AttackConfig&) = default;
};

struct ProgramSlot {
  double mean_photons = 0.0;
  double phase = 0.0;
  double wavelength_nm = 1551.0;

  friend bool operator==(const ProgramSlot&, const ProgramSlot&) = default;
};

/// Per-slot light replacing the channel output seen by Bob.
using PulseProgram = std::vector<ProgramSlot>;

/// Eve's per-slot outcome behind an ideal interferometer and detector pair at
/// Alice's output.
struct EveMeasurement {
  std::vector<Port> outcome;
};

/// Outcome for one slot (slot >= 1). Counter-based: depends only on
/// (seed, slot, Alice's bit, mu), so single slots can be queried in any order.
Port eve_outcome(std::uint64_t seed, std::int64_t slot, std::uint8_t alice_bit, double mu);

EveMeasurement eve_measure(const AliceRecord& alice, std::uint64_t seed);

/// Repeating {0, 0, pi, pi} blinding stream. Bright light alternates ports
/// every slot; `first_port` receives the first slot relative to
/// `previous_phase`. The defaults give the canonical [0, 0, pi, pi, ...].
PulseProgram build_blinding_segment(std::int64_t n_slots, const AttackConfig& cfg,
                                    Port first_port = Port::port2,
                                    double previous_phase = kPi);

/// Routes every bright slot to the port opposite `target` so the target
/// pair sees darkness and recovers. Constant phase (dphi = 0) darkens port 2;
/// alternating phase (dphi = pi) darkens port 1. Continuous with
/// `previous_phase`.
PulseProgram build_recovery_window(Port target, std::int64_t n_slots, const AttackConfig& cfg,
                                   double previous_phase = 0.0);

/// Bright-light state at the end of a program piece, needed to keep the next
/// piece phase-continuous.
struct ProgramTail {
  double last_phase = 0.0;
  Port last_bright_port = Port::none;
};

/// Alternating blinding slots opening every targeted cycle. After a
/// pass-through cycle they latch all four detectors into Blinded, so the
/// recovery window that follows works from any prior state.
inline constexpr std::int64_t kLeadInSlots = 4;

/// One attack cycle of `length` slots: kLeadInSlots of blinding, a recovery
/// window for `target`, then blinding whose first slot lands on `target` (the
/// re-blinding rising edge, i.e. the fake click). With target == none the
/// whole cycle is blinding. Appends to `out`.
ProgramTail append_attack_cycle(PulseProgram& out, const AttackConfig& cfg, Port target,
                                std::int64_t length, ProgramTail tail);

/// Slot offset of the fake click within a cycle.
inline std::int64_t fake_click_offset(const AttackConfig& cfg) {
  return kLeadInSlots + cfg.recovery_window_slots;
}

struct CycleDecision {
  bool attacked = false;
  Port target = Port::none;
};

/// Bernoulli(attacked_fraction) per cycle from `cycle_seed`; the target is
/// port 2 in emulation, Eve's outcome at the fake-click slot otherwise.
CycleDecision decide_cycle(const AttackConfig& cfg, std::uint64_t cycle_seed,
                           std::int64_t cycle_index, Port eve_outcome_at_click);

/// Alice's genuine pulses as they arrive at Bob when Eve passes a cycle
/// through.
struct PassThrough {
  const AliceRecord* alice = nullptr;
  double channel_transmittance = 1.0;
  double wavelength_nm = 1551.0;
};

/// Full program over Alice's record length. `measurements` is consulted only
/// in intercept_resend mode.
PulseProgram assemble_attack_program(const EveMeasurement& measurements, const AttackConfig& cfg,
                                     const PassThrough& channel, std::uint64_t cycle_seed);

/// CSV with header `slot,mean_photons,phase,wavelength_nm`.
void write_program_csv(std::ostream& os, const PulseProgram& program);

}  // namespace qkdsim
