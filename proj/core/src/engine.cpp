#include "qkdsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "qkdsim/rng.hpp"

namespace qkdsim {

double ScenarioConfig::transmittance() const {
  return db_to_transmittance(channel_loss_dB + receiver_loss_dB);
}

double ScenarioConfig::mean_efficiency() const {
  double s = 0.0;
  for (const auto& d : detectors) s += d.efficiency;
  return s / static_cast<double>(detectors.size());
}

double ScenarioConfig::mean_dark_prob() const {
  double s = 0.0;
  for (const auto& d : detectors) s += d.dark_prob_per_slot;
  return s / static_cast<double>(detectors.size());
}

void ScenarioConfig::validate() const {
  auto bad = [](const std::string& what) { throw std::invalid_argument(what); };
  if (!(clock_hz > 0.0)) bad("clock_hz must be > 0");
  if (n_slots < 2) bad("n_slots must be >= 2");
  if (!(mu >= 0.0) || !std::isfinite(mu)) bad("mu must be >= 0");
  if (!(channel_loss_dB >= 0.0) || !std::isfinite(channel_loss_dB)) bad("channel_loss_dB must be >= 0");
  if (!(receiver_loss_dB >= 0.0) || !std::isfinite(receiver_loss_dB)) bad("receiver_loss_dB must be >= 0");
  if (!(wavelength_nm > 0.0)) bad("wavelength_nm must be > 0");
  if (!(phase_flip_prob >= 0.0 && phase_flip_prob <= 1.0)) bad("phase_flip_prob must be in [0, 1]");
  if (!(ec_efficiency >= 1.0)) bad("ec_efficiency must be >= 1");
  if (!(alarm_threshold >= 0.0 && alarm_threshold <= 1.0)) bad("alarm_threshold must be in [0, 1]");
  if (!(expected_qber >= 0.0 && expected_qber < 0.5)) bad("expected_qber must be in [0, 0.5)");
  try {
    filter.validate();
  } catch (const std::invalid_argument& e) {
    bad(std::string("filter.") + e.what());
  }
  for (std::size_t i = 0; i < detectors.size(); ++i) {
    try {
      detectors[i].validate();
    } catch (const std::invalid_argument& e) {
      bad("detectors." + std::to_string(i) + "." + e.what());
    }
  }
  attack.validate();
}

namespace {

// Steps four detectors for one slot with a single shared uniform in the
// common no-click case. Independent Bernoulli outcomes are sampled exactly:
// first "any click?", then sequentially conditioned on at least one success.
// With force_any the caller has already established that at least one random
// click occurs in this slot.
unsigned fire_detectors(std::array<DetectorUnit, 4>& units, const std::array<double, 4>& incident,
                        std::int64_t slot, Rng& rng, ClickLog& log, bool force_any = false) {
  std::array<double, 4> p{};
  std::array<bool, 4> fired{};
  std::array<double, 5> none_from{};  // P(no random click among i..3)
  bool any_random = false;
  for (std::size_t i = 0; i < 4; ++i) {
    p[i] = units[i].arm(incident[i], slot);
    if (p[i] >= 1.0) {
      fired[i] = true;
    } else if (p[i] > 0.0) {
      any_random = true;
    }
  }
  if (any_random) {
    none_from[4] = 1.0;
    for (std::size_t i = 4; i-- > 0;) {
      const double q = (p[i] > 0.0 && p[i] < 1.0) ? 1.0 - p[i] : 1.0;
      none_from[i] = none_from[i + 1] * q;
    }
    if (force_any || uniform01(rng) >= none_from[0]) {
      bool conditioned = true;
      for (std::size_t i = 0; i < 4; ++i) {
        if (!(p[i] > 0.0 && p[i] < 1.0)) continue;
        if (conditioned) {
          const double any_from_here = 1.0 - none_from[i];
          fired[i] = uniform01(rng) * any_from_here < p[i];
          if (fired[i]) conditioned = false;
        } else {
          fired[i] = uniform01(rng) < p[i];
        }
      }
    }
  }
  unsigned mask = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    if (auto ev = units[i].settle(fired[i])) {
      log.events.push_back(*ev);
      mask |= 1U << i;
    }
  }
  return mask;
}

std::int64_t all_ready_from(const std::array<DetectorUnit, 4>& units) {
  std::int64_t r = 0;
  for (const auto& u : units) r = std::max(r, u.ready_from());
  return r;
}

std::string fmt_sci(double v) {
  std::ostringstream ss;
  ss.precision(3);
  ss << v;
  return ss.str();
}

}  // namespace

Pair monitored_pair(const SiftResult& sift) {
  const auto ca = sift.coincidence_counts[0];
  const auto cb = sift.coincidence_counts[1];
  if (ca != cb) return ca > cb ? Pair::A : Pair::B;
  const auto na = sift.detector_clicks(1) + sift.detector_clicks(2);
  const auto nb = sift.detector_clicks(3) + sift.detector_clicks(4);
  return nb > na ? Pair::B : Pair::A;
}

RunMetrics compute_metrics(const ScenarioConfig& cfg, const ClickLog& log, const SiftResult& sift) {
  RunMetrics m;
  m.qber = qber(sift);
  m.ccr_pair_A = ccr_measure(sift, Pair::A);
  m.ccr_pair_B = ccr_measure(sift, Pair::B);
  const double T = cfg.transmittance();
  const double eta = cfg.mean_efficiency();
  m.ccr_est = ccr_estimate(cfg.mu, T, eta, cfg.mean_dark_prob());

  const double duration_s = static_cast<double>(cfg.n_slots) / cfg.clock_hz;
  std::array<std::int64_t, 4> clicks{};
  for (const auto& ev : log.events) ++clicks[static_cast<std::size_t>(ev.detector_id - 1)];
  for (std::size_t i = 0; i < 4; ++i) {
    m.count_rates_cps[i] = static_cast<double>(clicks[i]) / duration_s;
  }
  m.singles = sift.singles_counts;
  m.coincidences = sift.coincidence_counts;
  m.K_sift = sift.sifted_length();

  const Pair pair = monitored_pair(sift);
  const auto& ccr_sel = pair == Pair::A ? m.ccr_pair_A : m.ccr_pair_B;
  const double ccr_est_clamped = std::clamp(m.ccr_est, 0.0, 1.0);
  if (ccr_sel) m.attack_fraction_est = attack_fraction_estimate(*ccr_sel, ccr_est_clamped);

  std::vector<std::string> reasons;
  const char* pair_name = pair == Pair::A ? "A" : "B";
  if (m.attack_fraction_est && *m.attack_fraction_est > cfg.alarm_threshold) {
    reasons.push_back("coincidence alarm: CCR of pair " + std::string(pair_name) + " = " +
                      fmt_sci(*ccr_sel) + " vs estimate " + fmt_sci(m.ccr_est) +
                      ", estimated attacked fraction " + fmt_sci(*m.attack_fraction_est) +
                      " > threshold " + fmt_sci(cfg.alarm_threshold));
  }

  if (m.K_sift == 0) {
    reasons.push_back("no sifted key");
  } else if (!m.qber || *m.qber >= 0.5) {
    reasons.push_back("QBER undefined or >= 0.5");
  } else {
    KeyRateInputs in;
    in.K_sift = m.K_sift;
    in.mu = cfg.mu;
    in.T = T;
    in.eta = eta;
    in.e = *m.qber;
    in.f_e = cfg.ec_efficiency;
    in.CCR_exp = ccr_sel.value_or(ccr_est_clamped);
    in.CCR_est = ccr_est_clamped;
    const KeyLength k = secure_key_length(in);
    m.K_sec = k.length;
    if (!k.secure_fraction) {
      reasons.push_back("secure key length undefined: " + k.abort_reason);
    } else if (k.length == 0) {
      reasons.push_back("secure key length is zero (secure fraction " +
                        fmt_sci(*k.secure_fraction) + ")");
    }
  }

  m.abort = !reasons.empty();
  for (std::size_t i = 0; i < reasons.size(); ++i) {
    if (i) m.abort_reason += "; ";
    m.abort_reason += reasons[i];
  }
  return m;
}

RunResult run_scenario(const ScenarioConfig& cfg, const EngineOptions& options) {
  cfg.validate();
  const std::uint64_t seed = cfg.seed;
  AlicePhaseStream alice(cfg.alice_mode, stream_seed(seed, Stream::alice));
  Rng det_rng(stream_seed(seed, Stream::detectors));
  const std::uint64_t eve_seed = stream_seed(seed, Stream::eve);
  const std::uint64_t cycle_seed = stream_seed(seed, Stream::attack_cycles);

  std::array<DetectorUnit, 4> units{
      DetectorUnit(1, cfg.detectors[0]), DetectorUnit(2, cfg.detectors[1]),
      DetectorUnit(3, cfg.detectors[2]), DetectorUnit(4, cfg.detectors[3])};

  const double receiver_T = db_to_transmittance(cfg.receiver_loss_dB);
  const double alice_mean_at_bob = cfg.mu * db_to_transmittance(cfg.channel_loss_dB);
  const bool attack_on = cfg.attack.enabled;
  const std::int64_t n = cfg.n_slots;
  const std::int64_t chunk = attack_on ? cfg.attack.cycle_slots() : std::int64_t{1} << 16;

  RunResult out;
  SiftAccumulator acc;
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(std::min(chunk, n)));
  PulseProgram program;
  ProgramTail tail;
  SlotField prev{-1, 0.0, 0.0, cfg.wavelength_nm};  // vacuum before slot 0
  std::uint8_t prev_bit = 0;
  bool prev_is_alice = false;

  // Alice's pulse after filter and receiver loss, and the incident means it
  // produces for each phase-difference bit.
  const double alice_mean =
      apply_bandpass({0, alice_mean_at_bob * receiver_T, 0.0, cfg.wavelength_nm}, cfg.filter)
          .mean_photons;
  std::array<std::array<double, 4>, 2> alice_incident{};
  std::array<double, 2> hazard{};
  bool skip_ahead = options.skip_ahead;
  for (unsigned b = 0; b < 2; ++b) {
    const PortIntensities ports = mzi_interfere(b ? kPi : 0.0, 0.0, alice_mean);
    const SplitIntensities pa = coupler_split(ports.port1_mean, cfg.wavelength_nm, cfg.coupler);
    const SplitIntensities pb = coupler_split(ports.port2_mean, cfg.wavelength_nm, cfg.coupler);
    alice_incident[b] = {pa.det_a_mean, pa.det_b_mean, pb.det_a_mean, pb.det_b_mean};
    for (std::size_t i = 0; i < 4; ++i) {
      const double inc = alice_incident[b][i];
      if (inc >= cfg.detectors[i].blind_threshold_photons) skip_ahead = false;
      hazard[b] -= std::log1p(-units[i].ready_click_probability(inc));
    }
  }

  // Skip-ahead over pass-through slots while every detector is Ready: an
  // Exp(1) budget is spent at -log P(no click) per slot, and the slot where it
  // runs out is the next slot with at least one click.
  constexpr double kNoBudget = -1.0;
  double budget = kNoBudget;
  std::int64_t ready_from = 0;

  for (std::int64_t start = 0, cycle = 0; start < n; start += chunk, ++cycle) {
    const std::int64_t len = std::min(chunk, n - start);
    for (std::int64_t i = 0; i < len; ++i) bits[static_cast<std::size_t>(i)] = alice.next();

    bool attacked = false;
    if (attack_on) {
      Port eve = Port::none;
      const std::int64_t click = fake_click_offset(cfg.attack);
      if (cfg.attack.mode == AttackMode::intercept_resend && click < len) {
        const auto c = static_cast<std::size_t>(click);
        eve = eve_outcome(eve_seed, start + click, bits[c] ^ bits[c - 1], cfg.mu);
      }
      const CycleDecision d = decide_cycle(cfg.attack, cycle_seed, cycle, eve);
      if (d.attacked) {
        program.clear();
        tail = append_attack_cycle(program, cfg.attack, d.target, len, tail);
        attacked = true;
      }
    }

    for (std::int64_t i = 0; i < len; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      const std::int64_t slot = start + i;
      const std::uint8_t alice_bit = slot >= 1 ? (bits[idx] ^ prev_bit) : 0;

      if (skip_ahead && !attacked && prev_is_alice && slot >= ready_from) {
        if (budget < 0.0) budget = -std::log1p(-uniform01(det_rng));
        budget -= hazard[alice_bit];
        if (budget >= 0.0) {
          prev_bit = bits[idx];
          continue;
        }
        budget = kNoBudget;
        const unsigned mask =
            fire_detectors(units, alice_incident[alice_bit], slot, det_rng, out.log, true);
        if (mask != 0) acc.add_slot(slot, alice_bit, mask);
        ready_from = all_ready_from(units);
        prev_bit = bits[idx];
        continue;
      }

      SlotField f;
      if (attacked) {
        const ProgramSlot& ps = program[idx];
        f = {slot, ps.mean_photons, ps.phase, ps.wavelength_nm};
      } else {
        f = {slot, alice_mean_at_bob, bits[idx] ? kPi : 0.0, cfg.wavelength_nm};
      }
      f.mean_photons *= receiver_T;
      f = apply_bandpass(f, cfg.filter);
      if (prev_is_alice) prev = {slot - 1, alice_mean, prev_bit ? kPi : 0.0, cfg.wavelength_nm};

      const PortIntensities ports = mzi_interfere(f, prev);
      const SplitIntensities pa = coupler_split(ports.port1_mean, f.wavelength_nm, cfg.coupler);
      const SplitIntensities pb = coupler_split(ports.port2_mean, f.wavelength_nm, cfg.coupler);
      const std::array<double, 4> incident{pa.det_a_mean, pa.det_b_mean, pb.det_a_mean,
                                           pb.det_b_mean};
      const unsigned mask = fire_detectors(units, incident, slot, det_rng, out.log);
      if (mask != 0) acc.add_slot(slot, alice_bit, mask);
      ready_from = all_ready_from(units);
      prev = f;
      prev_bit = bits[idx];
      prev_is_alice = !attacked;
    }
    if (!attacked) {
      prev = {start + len - 1, alice_mean, prev_bit ? kPi : 0.0, cfg.wavelength_nm};
      tail = {prev.phase, Port::none};
    }
  }

  out.sift = acc.take();
  if (cfg.phase_flip_prob > 0.0) {
    const std::uint64_t vis_seed = stream_seed(seed, Stream::visibility);
    for (std::size_t i = 0; i < out.sift.kept_slots.size(); ++i) {
      const auto s = static_cast<std::uint64_t>(out.sift.kept_slots[i]);
      if (hashed_uniform(vis_seed, s) < cfg.phase_flip_prob) out.sift.bob_bits[i] ^= 1U;
    }
  }
  out.metrics = compute_metrics(cfg, out.log, out.sift);
  return out;
}

}  // namespace qkdsim
