#include <cmath>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "oracle/oracle_values.hpp"
#include "qkdsim/attack.hpp"
#include "qkdsim/rng.hpp"

using namespace qkdsim;

namespace {

std::vector<double> phases(const PulseProgram& p) {
  std::vector<double> out;
  for (const auto& s : p) out.push_back(s.phase);
  return out;
}

// Port that receives the bright light of slot k (k >= 1).
Port lit_port(const PulseProgram& p, std::size_t k) {
  const auto ports = mzi_interfere(p[k].phase, p[k - 1].phase, p[k].mean_photons);
  if (ports.port2_mean == 0.0) return Port::port1;
  if (ports.port1_mean == 0.0) return Port::port2;
  return Port::none;
}

}  // namespace

TEST_CASE("eve_measure") {
  SUBCASE("saturated detection sees every slot") {
    const auto alice = alice_emit(1000, 100.0, AliceMode::random, 1);
    const auto m = eve_measure(alice, 2);
    CHECK(m.outcome[0] == Port::none);
    for (std::size_t s = 1; s < alice.size(); ++s) {
      REQUIRE(m.outcome[s] == (alice.bit(s) ? Port::port2 : Port::port1));
    }
  }
  SUBCASE("click law at mu = 0.2") {
    const auto alice = alice_emit(1'000'000, 0.2, AliceMode::random, 3);
    const auto m = eve_measure(alice, 4);
    const auto hits = std::count_if(m.outcome.begin(), m.outcome.end(),
                                    [](Port p) { return p != Port::none; });
    const double n = 999'999.0;
    const double expect = n * oracle::kEveClickProbMu02;
    const double sigma = std::sqrt(expect * (1.0 - oracle::kEveClickProbMu02));
    CHECK(std::abs(hits - expect) < 4.0 * sigma);
  }
  SUBCASE("single-slot query matches the batch") {
    const auto alice = alice_emit(500, 0.5, AliceMode::random, 5);
    const auto m = eve_measure(alice, 6);
    for (std::size_t s = 1; s < alice.size(); ++s) {
      CHECK(eve_outcome(6, static_cast<std::int64_t>(s), alice.bit(s), 0.5) == m.outcome[s]);
    }
  }
}

TEST_CASE("blinding segment") {
  AttackConfig cfg;
  const auto seg = build_blinding_segment(8, cfg);
  CHECK(phases(seg) == std::vector<double>{0, 0, kPi, kPi, 0, 0, kPi, kPi});
  for (const auto& s : seg) CHECK(s.mean_photons == cfg.blind_photons_per_slot);
  for (std::size_t k = 2; k < seg.size(); ++k) {
    CHECK(lit_port(seg, k) != lit_port(seg, k - 1));
    CHECK(lit_port(seg, k) != Port::none);
  }
  CHECK_THROWS_AS(build_blinding_segment(3, cfg), std::invalid_argument);
}

TEST_CASE("recovery window") {
  AttackConfig cfg;
  SUBCASE("port 2 target: constant phase") {
    const auto w = build_recovery_window(Port::port2, 10, cfg, 0.0);
    for (const auto& s : w) CHECK(s.phase == 0.0);
    for (std::size_t k = 1; k < w.size(); ++k) {
      CHECK(mzi_interfere(w[k].phase, w[k - 1].phase, w[k].mean_photons).port2_mean == 0.0);
    }
  }
  SUBCASE("port 1 target: alternating phase") {
    const auto w = build_recovery_window(Port::port1, 10, cfg, 0.0);
    CHECK(w[0].phase == kPi);
    CHECK(w[1].phase == 0.0);
    for (std::size_t k = 1; k < w.size(); ++k) {
      CHECK(mzi_interfere(w[k].phase, w[k - 1].phase, w[k].mean_photons).port1_mean == 0.0);
    }
  }
  CHECK_THROWS_AS(build_recovery_window(Port::port2, 0, cfg), std::invalid_argument);
  CHECK_THROWS_AS(build_recovery_window(Port::none, 10, cfg), std::invalid_argument);
}

TEST_CASE("attack cycle layout") {
  AttackConfig cfg;
  cfg.blinding_slots = 30;
  cfg.recovery_window_slots = 10;
  for (Port target : {Port::port1, Port::port2}) {
    PulseProgram p;
    ProgramTail tail{0.0, Port::port1};
    append_attack_cycle(p, cfg, target, cfg.cycle_slots(), tail);
    REQUIRE(p.size() == 40);
    const auto click = static_cast<std::size_t>(fake_click_offset(cfg));
    // Every slot before the window is lit, then the target stays dark.
    for (std::size_t k = 1; k < static_cast<std::size_t>(kLeadInSlots); ++k) {
      CHECK(lit_port(p, k) != lit_port(p, k - 1));
    }
    for (auto k = static_cast<std::size_t>(kLeadInSlots); k < click; ++k) {
      CHECK(lit_port(p, k) == other_port(target));
    }
    CHECK(lit_port(p, click) == target);
    for (std::size_t k = click + 1; k < p.size(); ++k) CHECK(lit_port(p, k) != lit_port(p, k - 1));
  }
}

TEST_CASE("cycle decisions") {
  AttackConfig cfg;
  CHECK(decide_cycle(cfg, 1, 0, Port::none).target == Port::port2);
  cfg.mode = AttackMode::intercept_resend;
  CHECK(decide_cycle(cfg, 1, 0, Port::port1).target == Port::port1);
  CHECK(decide_cycle(cfg, 1, 0, Port::none).target == Port::none);
  cfg.attacked_fraction = 0.0;
  CHECK_FALSE(decide_cycle(cfg, 1, 0, Port::port1).attacked);

  cfg.attacked_fraction = 0.3;
  int hits = 0;
  for (int k = 0; k < 100'000; ++k) hits += decide_cycle(cfg, 9, k, Port::port1).attacked;
  CHECK(std::abs(hits - 30'000.0) < 4.0 * std::sqrt(100'000 * 0.3 * 0.7));
}

TEST_CASE("assembled program") {
  AttackConfig cfg;
  cfg.enabled = true;
  const auto alice = alice_emit(30'000, 0.2, AliceMode::static_0pi, 1);
  const PassThrough channel{&alice, std::pow(10.0, -1.8), 1551.0};

  SUBCASE("q = 0 is the channel output") {
    cfg.attacked_fraction = 0.0;
    const auto p = assemble_attack_program({}, cfg, channel, 3);
    REQUIRE(p.size() == alice.size());
    for (std::size_t s = 0; s < p.size(); ++s) {
      REQUIRE(p[s] == ProgramSlot{0.2 * std::pow(10.0, -1.8), alice.phase(s), 1551.0});
    }
  }
  SUBCASE("emulation targets port 2 once per cycle") {
    const auto p = assemble_attack_program({}, cfg, channel, 3);
    REQUIRE(p.size() == alice.size());
    const auto period = static_cast<std::size_t>(cfg.cycle_slots());
    const auto click = static_cast<std::size_t>(fake_click_offset(cfg));
    for (std::size_t c = 0; c < 3; ++c) {
      CHECK(lit_port(p, c * period + click) == Port::port2);
      CHECK(lit_port(p, c * period + click - 1) == Port::port1);
    }
    for (const auto& s : p) REQUIRE((s.phase == 0.0 || s.phase == kPi));
  }
  SUBCASE("average power per output port is near -25.85 dBm") {
    const auto p = assemble_attack_program({}, cfg, channel, 3);
    const double mean =
        std::accumulate(p.begin(), p.end(), 0.0,
                        [](double a, const ProgramSlot& s) { return a + s.mean_photons; }) /
        static_cast<double>(p.size());
    const double per_port = mean * std::pow(10.0, -0.2) / 2.0;  // receiver loss, two ports
    CHECK(std::abs(photons_to_dBm(per_port, 1e9, 1551.0) - -25.85) <= 1.0);
  }
  SUBCASE("intercept mode needs measurements") {
    cfg.mode = AttackMode::intercept_resend;
    CHECK_THROWS_AS(assemble_attack_program({}, cfg, channel, 3), std::invalid_argument);
  }
}

TEST_CASE("config validation and warnings") {
  AttackConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  std::array<DetectorParams, 4> dets{};
  CHECK(cfg.warnings(dets).empty());
  cfg.recovery_window_slots = 5;
  CHECK(cfg.warnings(dets).size() == 4);
  cfg.attacked_fraction = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.blinding_slots = 2;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("program CSV") {
  PulseProgram p{{1.0, 0.0, 1551.0}, {2.5, kPi, 1551.0}};
  std::ostringstream os;
  write_program_csv(os, p);
  const std::string s = os.str();
  CHECK(s.rfind("slot,mean_photons,phase,wavelength_nm\n0,1,0,1551\n1,2.5,", 0) == 0);
}
