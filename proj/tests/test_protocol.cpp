#include <cmath>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "oracle/oracle_values.hpp"
#include "qkdsim/optics.hpp"
#include "qkdsim/protocol.hpp"

using namespace qkdsim;

namespace {

// Phases 0 everywhere except the listed pi slots.
AliceRecord alice_with_pi(std::size_t n, std::initializer_list<std::size_t> pi_slots) {
  AliceRecord a;
  a.phase_bits.assign(n, 0);
  for (auto s : pi_slots) a.phase_bits[s] = 1;
  return a;
}

ClickLog log_of(std::initializer_list<ClickEvent> evs) { return ClickLog{evs}; }

KeyRateInputs link_inputs(double e) {
  KeyRateInputs in;
  in.K_sift = 1'000'000;
  in.mu = 0.2;
  in.T = std::pow(10.0, -1.8);
  in.eta = 0.1;
  in.e = e;
  in.f_e = 1.16;
  return in;
}

}  // namespace

TEST_CASE("alice_emit") {
  SUBCASE("static mode alternates") {
    const auto a = alice_emit(4, 0.2, AliceMode::static_0pi, 99);
    CHECK(a.phase_bits == std::vector<std::uint8_t>{0, 1, 0, 1});
    CHECK(a.phase(1) == kPi);
    CHECK(a.bit(1) == 1);
    CHECK(a.bit(2) == 1);
  }
  SUBCASE("random mode is balanced and reproducible") {
    const auto a = alice_emit(1'000'000, 0.2, AliceMode::random, 7);
    std::int64_t ones = 0;
    for (auto b : a.phase_bits) ones += b;
    CHECK(std::abs(ones - 500'000.0) < 4.0 * std::sqrt(250'000.0));
    CHECK(alice_emit(1000, 0.2, AliceMode::random, 7).phase_bits ==
          std::vector<std::uint8_t>(a.phase_bits.begin(), a.phase_bits.begin() + 1000));
    CHECK(alice_emit(1000, 0.2, AliceMode::random, 8).phase_bits !=
          alice_emit(1000, 0.2, AliceMode::random, 7).phase_bits);
  }
  CHECK_THROWS_AS(alice_emit(1, 0.2, AliceMode::random, 1), std::invalid_argument);
  CHECK_THROWS_AS(alice_emit(10, 0.0, AliceMode::random, 1), std::invalid_argument);
}

TEST_CASE("sift maps ports to bits") {
  const auto alice = alice_with_pi(10, {5});  // dphi = pi at slots 5 and 6

  SUBCASE("agreement") {
    const auto r = sift(alice, log_of({{1, 3}}));
    CHECK(r.alice_bits == std::vector<std::uint8_t>{0});
    CHECK(r.bob_bits == std::vector<std::uint8_t>{0});
    CHECK(r.kept_slots == std::vector<std::int64_t>{3});
    CHECK(qber(r) == 0.0);
  }
  SUBCASE("error") {
    const auto r = sift(alice, log_of({{3, 3}}));
    CHECK(r.bob_bits == std::vector<std::uint8_t>{1});
    CHECK(qber(r) == 1.0);
  }
  SUBCASE("pi slot") {
    const auto r = sift(alice, log_of({{4, 5}, {3, 6}}));
    CHECK(r.alice_bits == std::vector<std::uint8_t>{1, 1});
    CHECK(r.bob_bits == std::vector<std::uint8_t>{1, 1});
    CHECK(r.singles_counts == std::array<std::int64_t, 4>{0, 0, 1, 1});
  }
  SUBCASE("pair coincidence") {
    const auto r = sift(alice, log_of({{3, 6}, {4, 6}}));
    CHECK(r.sifted_length() == 0);
    CHECK(r.coincidence_counts == std::array<std::int64_t, 2>{0, 1});
    CHECK(r.detector_clicks(3) == 1);
    CHECK(r.detector_clicks(4) == 1);
    CHECK(qber(r) == 0.0);  // both detectors name the right port
  }
  SUBCASE("both ports") {
    const auto r = sift(alice, log_of({{1, 2}, {2, 2}, {3, 2}}));
    CHECK(r.sifted_length() == 0);
    CHECK(r.discarded_multiport == 3);
  }
  SUBCASE("slot 0 is excluded") {
    const auto r = sift(alice, log_of({{1, 0}, {4, 0}}));
    CHECK(r.excluded_slot0 == 2);
    CHECK_FALSE(qber(r));
  }
  SUBCASE("bad logs") {
    CHECK_THROWS_AS(sift(alice, log_of({{1, 10}})), std::invalid_argument);
    CHECK_THROWS_AS(sift(alice, log_of({{2, 4}, {1, 4}})), std::invalid_argument);
    CHECK_THROWS_AS(sift(alice, log_of({{1, 5}, {1, 4}})), std::invalid_argument);
  }
}

TEST_CASE("qber without data") { CHECK_FALSE(qber(SiftResult{})); }

TEST_CASE("click CSV round trip") {
  const auto log = log_of({{1, 3}, {3, 7}, {4, 7}});
  std::stringstream ss;
  write_click_csv(ss, log);
  CHECK(ss.str() == "slot,detector_id\n3,1\n7,3\n7,4\n");
  const auto back = read_click_csv(ss);
  CHECK(back.events == log.events);
  CHECK(back.is_ordered());

  std::istringstream bad_header("slot,det\n1,1\n");
  CHECK_THROWS(read_click_csv(bad_header));
  std::istringstream bad_row("slot,detector_id\n1,9\n");
  CHECK_THROWS(read_click_csv(bad_row));
}

TEST_CASE("ccr_estimate") {
  CHECK(ccr_estimate(0.0, 0.5, 0.5, 0.0) == 0.0);
  const double T = std::pow(10.0, -1.8);
  CHECK(ccr_estimate(0.2, T, 0.1, 4.21e-5) ==
        doctest::Approx(oracle::kCcrEstLinkDark).epsilon(1e-12));
  CHECK(ccr_estimate(0.2, 0.01, 0.1, 1e-7) == doctest::Approx(oracle::kCcrEstDefault).epsilon(1e-12));
  CHECK(ccr_estimate(0.2, 0.01, 0.1, 1e-7) == doctest::Approx(5.0e-5).epsilon(0.01));
  CHECK(ccr_estimate(0.4, T, 0.1, 0.0) == 2.0 * ccr_estimate(0.2, T, 0.1, 0.0));
}

TEST_CASE("ccr_measure") {
  SiftResult r;
  CHECK_FALSE(ccr_measure(r, Pair::A));
  r.singles_counts = {100, 100, 0, 0};
  r.coincidence_counts = {10, 5};
  CHECK(*ccr_measure(r, Pair::A) == doctest::Approx(20.0 / 220.0));
  CHECK(*ccr_measure(r, Pair::B) == 1.0);
  r.coincidence_counts = {0, 0};
  CHECK(*ccr_measure(r, Pair::A) == 0.0);
}

TEST_CASE("secure fraction") {
  SUBCASE("e = 0 without attack") {
    const auto in = link_inputs(0.0);
    CHECK(*secure_fraction(in) == doctest::Approx(oracle::kSecureFractionE0).epsilon(1e-12));
    CHECK(std::abs(*secure_fraction(in) - 0.6006) <= 1e-4);
  }
  SUBCASE("e = 0.032 with a CCR excess") {
    auto in = link_inputs(0.032);
    in.CCR_exp = 9e-5;
    CHECK(*secure_fraction(in) == doctest::Approx(oracle::kSecureFractionE032).epsilon(1e-12));
    CHECK(std::abs(*secure_fraction(in) - 0.107) <= 0.002);
  }
  SUBCASE("full attack gives no key") {
    auto in = link_inputs(0.0);
    in.CCR_exp = 1.0;
    in.CCR_est = 5e-5;
    const auto k = secure_key_length(in);
    CHECK(k.length == 0);
    CHECK(k.secure_fraction);
  }
  SUBCASE("undefined bound") {
    auto in = link_inputs(0.2);
    std::string why;
    CHECK_FALSE(secure_fraction(in, &why));
    CHECK_FALSE(why.empty());
    const auto k = secure_key_length(in);
    CHECK(k.length == 0);
    CHECK_FALSE(k.abort_reason.empty());
  }
  SUBCASE("key length floors") {
    auto in = link_inputs(0.0);
    in.K_sift = 10;
    CHECK(secure_key_length(in).length == 6);
  }
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(0.032) == doctest::Approx(oracle::kBinaryEntropy032).epsilon(1e-12));
  auto bad = link_inputs(0.0);
  bad.T = 0.0;
  CHECK_THROWS_AS(secure_fraction(bad), std::invalid_argument);
}

TEST_CASE("attack_fraction_estimate") {
  CHECK(*attack_fraction_estimate(5e-5, 5e-5) == 0.0);
  CHECK(*attack_fraction_estimate(1.0, 5e-5) == 1.0);
  CHECK(*attack_fraction_estimate(0.5, 5e-5) ==
        doctest::Approx(oracle::kAttackFractionHalf).epsilon(1e-12));
  CHECK(*attack_fraction_estimate(0.0, 5e-5) == 0.0);
  CHECK_FALSE(attack_fraction_estimate(1.0, 1.0));
  CHECK_THROWS_AS(attack_fraction_estimate(1.5, 0.0), std::invalid_argument);
}

TEST_CASE("detector_statistics_check") {
  SiftResult r;
  r.singles_counts = {1000, 1000, 2000, 0};
  auto b = detector_statistics_check(r, 3.0);
  CHECK_FALSE(b[0].flagged);
  CHECK(b[1].z == doctest::Approx(oracle::kPairZ2000To0).epsilon(1e-12));
  CHECK(b[1].flagged);
  CHECK(detector_statistics_check(r, 44.0)[1].flagged);

  r.singles_counts = {1030, 970, 0, 0};
  b = detector_statistics_check(r, 3.0);
  CHECK(b[0].z == doctest::Approx(oracle::kPairZ1030To970).epsilon(1e-12));
  CHECK_FALSE(b[0].flagged);

  r.singles_counts = {10, 10, 10, 10};
  CHECK_THROWS_AS(detector_statistics_check(r, 3.0), std::invalid_argument);
}
