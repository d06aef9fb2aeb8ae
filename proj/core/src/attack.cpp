#include "qkdsim/attack.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "qkdsim/rng.hpp"

namespace qkdsim {

namespace {

double bit_phase(unsigned bit) { return bit ? kPi : 0.0; }

unsigned phase_bit(double phase) { return wrap_phase(phase) == kPi ? 1U : 0U; }

// Phase step that routes bright light to `port` given the previous slot.
unsigned routing_step(Port port) { return port == Port::port2 ? 1U : 0U; }

}  // namespace

void AttackConfig::validate() const {
  if (!(blind_photons_per_slot > 0.0)) {
    throw std::invalid_argument("attack.blind_photons_per_slot must be > 0");
  }
  if (blinding_slots < kLeadInSlots + 1) {
    throw std::invalid_argument("attack.blinding_slots must be >= " +
                                std::to_string(kLeadInSlots + 1));
  }
  if (recovery_window_slots < 1) {
    throw std::invalid_argument("attack.recovery_window_slots must be >= 1");
  }
  if (!(attacked_fraction >= 0.0 && attacked_fraction <= 1.0)) {
    throw std::invalid_argument("attack.attacked_fraction must be in [0, 1]");
  }
  if (!(blind_wavelength_nm > 0.0)) {
    throw std::invalid_argument("attack.blind_wavelength_nm must be > 0");
  }
}

std::vector<std::string> AttackConfig::warnings(std::span<const DetectorParams> detectors) const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < detectors.size(); ++i) {
    if (recovery_window_slots < detectors[i].recovery_slots) {
      out.push_back("recovery window (" + std::to_string(recovery_window_slots) +
                    " slots) shorter than detector " + std::to_string(i + 1) +
                    " recovery time (" + std::to_string(detectors[i].recovery_slots) +
                    " slots); fake clicks will not occur");
    }
  }
  return out;
}

Port eve_outcome(std::uint64_t seed, std::int64_t slot, std::uint8_t alice_bit, double mu) {
  if (slot < 1) return Port::none;
  const double p_click = -std::expm1(-mu);
  if (hashed_uniform(seed, static_cast<std::uint64_t>(slot)) >= p_click) return Port::none;
  return alice_bit ? Port::port2 : Port::port1;
}

EveMeasurement eve_measure(const AliceRecord& alice, std::uint64_t seed) {
  EveMeasurement m;
  m.outcome.resize(alice.size(), Port::none);
  for (std::size_t s = 1; s < alice.size(); ++s) {
    m.outcome[s] = eve_outcome(seed, static_cast<std::int64_t>(s), alice.bit(s),
                               alice.mean_photons_per_pulse);
  }
  return m;
}

PulseProgram build_blinding_segment(std::int64_t n_slots, const AttackConfig& cfg, Port first_port,
                                    double previous_phase) {
  if (n_slots < 4) throw std::invalid_argument("build_blinding_segment: n_slots must be >= 4");
  PulseProgram out;
  out.reserve(static_cast<std::size_t>(n_slots));
  unsigned bit = phase_bit(previous_phase);
  unsigned step = routing_step(first_port == Port::none ? Port::port2 : first_port);
  for (std::int64_t k = 0; k < n_slots; ++k) {
    bit ^= step;
    out.push_back({cfg.blind_photons_per_slot, bit_phase(bit), cfg.blind_wavelength_nm});
    step ^= 1U;
  }
  return out;
}

PulseProgram build_recovery_window(Port target, std::int64_t n_slots, const AttackConfig& cfg,
                                   double previous_phase) {
  if (n_slots < 1) throw std::invalid_argument("build_recovery_window: n_slots must be >= 1");
  if (target == Port::none) throw std::invalid_argument("build_recovery_window: no target port");
  PulseProgram out;
  out.reserve(static_cast<std::size_t>(n_slots));
  // Light goes to the other port on every slot.
  const unsigned step = routing_step(other_port(target));
  unsigned bit = phase_bit(previous_phase);
  for (std::int64_t k = 0; k < n_slots; ++k) {
    bit ^= step;
    out.push_back({cfg.blind_photons_per_slot, bit_phase(bit), cfg.blind_wavelength_nm});
  }
  return out;
}

ProgramTail append_attack_cycle(PulseProgram& out, const AttackConfig& cfg, Port target,
                                std::int64_t length, ProgramTail tail) {
  if (length <= 0) return tail;
  unsigned bit = phase_bit(tail.last_phase);
  Port port = tail.last_bright_port;
  auto emit = [&](Port to) {
    bit ^= routing_step(to);
    out.push_back({cfg.blind_photons_per_slot, bit_phase(bit), cfg.blind_wavelength_nm});
    port = to;
  };

  std::int64_t k = 0;
  Port next = port == Port::none ? Port::port2 : other_port(port);
  if (target != Port::none) {
    for (; k < length && k < kLeadInSlots; ++k) {
      emit(next);
      next = other_port(next);
    }
    const Port lit = other_port(target);
    for (std::int64_t r = 0; k < length && r < cfg.recovery_window_slots; ++k, ++r) emit(lit);
    next = target;
  }
  for (; k < length; ++k) {
    emit(next);
    next = other_port(next);
  }
  return {bit_phase(bit), port};
}

CycleDecision decide_cycle(const AttackConfig& cfg, std::uint64_t cycle_seed,
                           std::int64_t cycle_index, Port eve_outcome_at_click) {
  CycleDecision d;
  const double q = cfg.attacked_fraction;
  if (q >= 1.0) {
    d.attacked = true;
  } else if (q > 0.0) {
    d.attacked = hashed_uniform(cycle_seed, static_cast<std::uint64_t>(cycle_index)) < q;
  }
  if (d.attacked) {
    d.target = cfg.mode == AttackMode::emulation ? Port::port2 : eve_outcome_at_click;
  }
  return d;
}

PulseProgram assemble_attack_program(const EveMeasurement& measurements, const AttackConfig& cfg,
                                     const PassThrough& channel, std::uint64_t cycle_seed) {
  if (channel.alice == nullptr) throw std::invalid_argument("assemble_attack_program: no Alice record");
  cfg.validate();
  const AliceRecord& alice = *channel.alice;
  const auto n = static_cast<std::int64_t>(alice.size());
  if (cfg.mode == AttackMode::intercept_resend &&
      measurements.outcome.size() != alice.size()) {
    throw std::invalid_argument("assemble_attack_program: measurement length mismatch");
  }
  const double pulse_mean = alice.mean_photons_per_pulse * channel.channel_transmittance;
  const std::int64_t cycle = cfg.cycle_slots();

  PulseProgram out;
  out.reserve(alice.size());
  ProgramTail tail;
  for (std::int64_t start = 0, k = 0; start < n; start += cycle, ++k) {
    const std::int64_t len = std::min(cycle, n - start);
    Port eve = Port::none;
    const std::int64_t click = start + fake_click_offset(cfg);
    if (cfg.mode == AttackMode::intercept_resend && click < n) {
      eve = measurements.outcome[static_cast<std::size_t>(click)];
    }
    const CycleDecision d = decide_cycle(cfg, cycle_seed, k, eve);
    if (d.attacked) {
      tail = append_attack_cycle(out, cfg, d.target, len, tail);
    } else {
      for (std::int64_t s = start; s < start + len; ++s) {
        out.push_back({pulse_mean, alice.phase(static_cast<std::size_t>(s)), channel.wavelength_nm});
      }
      tail = {out.back().phase, Port::none};
    }
  }
  return out;
}

void write_program_csv(std::ostream& os, const PulseProgram& program) {
  os << "slot,mean_photons,phase,wavelength_nm\n";
  const auto old = os.precision(17);
  for (std::size_t s = 0; s < program.size(); ++s) {
    const auto& p = program[s];
    os << s << ',' << p.mean_photons << ',' << p.phase << ',' << p.wavelength_nm << '\n';
  }
  os.precision(old);
}

}  // namespace qkdsim
