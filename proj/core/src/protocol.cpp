#include "qkdsim/protocol.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "qkdsim/optics.hpp"

namespace qkdsim {

AlicePhaseStream::AlicePhaseStream(AliceMode mode, std::uint64_t seed)
    : mode_(mode), rng_(seed) {}

std::uint8_t AlicePhaseStream::next() {
  if (mode_ == AliceMode::static_0pi) {
    return static_cast<std::uint8_t>(index_++ & 1U);
  }
  if (remaining_ == 0) {
    word_ = rng_();
    remaining_ = 64;
  }
  const auto b = static_cast<std::uint8_t>(word_ & 1U);
  word_ >>= 1;
  --remaining_;
  ++index_;
  return b;
}

double AliceRecord::phase(std::size_t slot) const { return phase_bits[slot] ? kPi : 0.0; }

AliceRecord alice_emit(std::int64_t n_slots, double mu, AliceMode mode, std::uint64_t seed) {
  if (n_slots < 2) throw std::invalid_argument("alice_emit: n_slots must be >= 2");
  if (!(mu > 0.0)) throw std::invalid_argument("alice_emit: mu must be > 0");
  AliceRecord rec;
  rec.mean_photons_per_pulse = mu;
  rec.phase_bits.resize(static_cast<std::size_t>(n_slots));
  AlicePhaseStream stream(mode, seed);
  for (auto& b : rec.phase_bits) b = stream.next();
  return rec;
}

bool ClickLog::is_ordered() const { return std::is_sorted(events.begin(), events.end()); }

void write_click_csv(std::ostream& os, const ClickLog& log) {
  os << "slot,detector_id\n";
  for (const auto& ev : log.events) os << ev.slot << ',' << ev.detector_id << '\n';
}

ClickLog read_click_csv(std::istream& is) {
  ClickLog log;
  std::string line;
  if (!std::getline(is, line) || line != "slot,detector_id") {
    throw std::runtime_error("click CSV: expected header 'slot,detector_id'");
  }
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    ClickEvent ev;
    char comma = 0;
    if (!(ss >> ev.slot >> comma >> ev.detector_id) || comma != ',' || ev.detector_id < 1 ||
        ev.detector_id > 4 || ev.slot < 0) {
      throw std::runtime_error("click CSV: malformed row at line " + std::to_string(lineno));
    }
    log.events.push_back(ev);
  }
  return log;
}

std::int64_t SiftResult::detector_clicks(int detector_id) const {
  const int pair = port_of(detector_id) - 1;
  return singles_counts[static_cast<std::size_t>(detector_id - 1)] +
         coincidence_counts[static_cast<std::size_t>(pair)];
}

void SiftAccumulator::add_slot(std::int64_t slot, std::uint8_t alice_bit, unsigned detector_mask) {
  if (slot <= last_slot_) {
    throw std::invalid_argument("sift: slot " + std::to_string(slot) + " out of order");
  }
  last_slot_ = slot;
  detector_mask &= 0xFU;
  if (detector_mask == 0) return;
  const int n_clicks = std::popcount(detector_mask);
  if (slot == 0) {
    result_.excluded_slot0 += n_clicks;
    return;
  }
  const unsigned port1 = detector_mask & 0x3U;
  const unsigned port2 = detector_mask & 0xCU;
  if (port1 && port2) {
    result_.discarded_multiport += n_clicks;
    return;
  }
  const std::uint8_t bob_bit = port1 ? 0 : 1;
  const std::size_t pair = port1 ? 0 : 1;
  if (n_clicks == 2) {
    ++result_.coincidence_counts[pair];
    if (bob_bit != alice_bit) ++result_.coincidence_errors[pair];
    return;
  }
  const int det_index = std::countr_zero(detector_mask);
  ++result_.singles_counts[static_cast<std::size_t>(det_index)];
  result_.alice_bits.push_back(alice_bit);
  result_.bob_bits.push_back(bob_bit);
  result_.kept_slots.push_back(slot);
}

SiftResult sift(const AliceRecord& alice, const ClickLog& log) {
  SiftAccumulator acc;
  const auto& ev = log.events;
  std::size_t i = 0;
  while (i < ev.size()) {
    const std::int64_t slot = ev[i].slot;
    if (slot < 0 || static_cast<std::size_t>(slot) >= alice.size()) {
      throw std::invalid_argument("sift: click at slot " + std::to_string(slot) +
                                  " outside Alice's record");
    }
    unsigned mask = 0;
    int prev_id = 0;
    for (; i < ev.size() && ev[i].slot == slot; ++i) {
      if (ev[i].detector_id <= prev_id) throw std::invalid_argument("sift: log not ordered");
      prev_id = ev[i].detector_id;
      mask |= 1U << (ev[i].detector_id - 1);
    }
    const std::uint8_t bit = slot >= 1 ? alice.bit(static_cast<std::size_t>(slot)) : 0;
    acc.add_slot(slot, bit, mask);
  }
  return acc.take();
}

std::optional<double> qber(const SiftResult& result) {
  std::int64_t errors = result.coincidence_errors[0] + result.coincidence_errors[1];
  for (std::size_t i = 0; i < result.alice_bits.size(); ++i) {
    errors += result.alice_bits[i] != result.bob_bits[i];
  }
  const std::int64_t n =
      result.sifted_length() + result.coincidence_counts[0] + result.coincidence_counts[1];
  if (n == 0) return std::nullopt;
  return static_cast<double>(errors) / static_cast<double>(n);
}

double ccr_estimate(double mu, double T, double eta, double d) {
  return 0.25 * mu * T * eta + d;
}

std::optional<double> ccr_measure(const SiftResult& result, Pair pair) {
  const int first = pair == Pair::A ? 1 : 3;
  const std::int64_t clicks = result.detector_clicks(first) + result.detector_clicks(first + 1);
  if (clicks == 0) return std::nullopt;
  const auto coinc = result.coincidence_counts[static_cast<std::size_t>(pair)];
  return 2.0 * static_cast<double>(coinc) / static_cast<double>(clicks);
}

void KeyRateInputs::validate() const {
  auto bad = [](const char* what) { throw std::invalid_argument(std::string("KeyRateInputs: ") + what); };
  if (K_sift < 0) bad("K_sift must be >= 0");
  if (!(mu >= 0.0)) bad("mu must be >= 0");
  if (!(T > 0.0 && T <= 1.0)) bad("T must be in (0, 1]");
  if (!(eta > 0.0 && eta <= 1.0)) bad("eta must be in (0, 1]");
  if (!(e >= 0.0 && e < 0.5)) bad("e must be in [0, 0.5)");
  if (!(f_e >= 1.0)) bad("f_e must be >= 1");
  if (!(CCR_exp >= 0.0 && CCR_exp <= 1.0)) bad("CCR_exp must be in [0, 1]");
  if (!(CCR_est >= 0.0 && CCR_est <= 1.0)) bad("CCR_est must be in [0, 1]");
}

double binary_entropy(double e) {
  if (e <= 0.0 || e >= 1.0) return 0.0;
  return -e * std::log2(e) - (1.0 - e) * std::log2(1.0 - e);
}

std::optional<double> secure_fraction(const KeyRateInputs& in, std::string* reason) {
  in.validate();
  if (in.e >= 1.0 / 6.0) {
    if (reason) *reason = "QBER >= 1/6: collision-probability bound undefined";
    return std::nullopt;
  }
  const double u = 1.0 - 6.0 * in.e;
  const double log_arg = 1.0 - in.e * in.e - 0.5 * u * u;
  if (!(log_arg > 0.0)) {
    if (reason) *reason = "privacy-amplification log argument <= 0";
    return std::nullopt;
  }
  const double pa_coeff = 1.0 - 2.0 * in.mu * (1.0 - in.eta * in.T);
  return pa_coeff * -std::log2(log_arg) - in.f_e * binary_entropy(in.e) -
         (in.CCR_exp - in.CCR_est);
}

KeyLength secure_key_length(const KeyRateInputs& in) {
  KeyLength out;
  out.secure_fraction = secure_fraction(in, &out.abort_reason);
  if (!out.secure_fraction) return out;
  const double bits = std::floor(static_cast<double>(in.K_sift) * *out.secure_fraction);
  out.length = bits > 0.0 ? static_cast<std::int64_t>(bits) : 0;
  return out;
}

std::optional<double> attack_fraction_estimate(double ccr_exp, double ccr_est) {
  if (!(ccr_exp >= 0.0 && ccr_exp <= 1.0 && ccr_est >= 0.0 && ccr_est <= 1.0)) {
    throw std::invalid_argument("attack_fraction_estimate: CCR values must be in [0, 1]");
  }
  if (ccr_est == 1.0) return std::nullopt;
  return std::clamp((ccr_exp - ccr_est) / (1.0 - ccr_est), 0.0, 1.0);
}

std::array<PairBalance, 2> detector_statistics_check(const SiftResult& result,
                                                     double tolerance_sigma) {
  const auto& s = result.singles_counts;
  if (s[0] + s[1] + s[2] + s[3] < 100) {
    throw std::invalid_argument("detector_statistics_check: need >= 100 single clicks");
  }
  std::array<PairBalance, 2> out{};
  for (std::size_t p = 0; p < 2; ++p) {
    const double a = static_cast<double>(s[2 * p]);
    const double b = static_cast<double>(s[2 * p + 1]);
    if (a + b > 0.0) out[p].z = std::abs(a - b) / std::sqrt(a + b);
    out[p].flagged = out[p].z > tolerance_sigma;
  }
  return out;
}

}  // namespace qkdsim
