#include "doctest.h"

#include <limits>

#include "csicalib/chipsim.hpp"
#include "csicalib/phase.hpp"
#include "support.hpp"

using namespace csicalib;

namespace {

SimConfig quiet(std::array<double, 3> att) {
  SimConfig c;
  c.attenuation_db = att;
  c.noise_floor_dbm = -std::numeric_limits<double>::infinity();
  return c;
}

double zero_fraction(const SimCapture& cap, int port) {
  std::size_t zeros = 0, total = 0;
  for (const auto& r : cap.records) {
    for (int k = 0; k < kSubcarriers; ++k) {
      zeros += r.at(k, port, 0).is_zero();
      ++total;
    }
  }
  return double(zeros) / double(total);
}

}  // namespace

TEST_CASE("agc readout pins at the limits") {
  SimConfig c;
  CHECK(agc_readout(-3 - 16, c) == 26);
  CHECK(agc_readout(-3 - 80, c) == 63);
  CHECK(agc_readout(-3 - 30, c) == 28);
  CHECK(agc_readout(-std::numeric_limits<double>::infinity(), c) == 63);

  c.attenuation_db = {16, 16, 16};
  CHECK(simulate_capture(c, {}).records.front().agc == 26);
  c.attenuation_db = {80, 80, 80};
  CHECK(simulate_capture(c, {}).records.front().agc == 63);
}

TEST_CASE("moderate balanced capture matches the measured readouts") {
  SimConfig c;  // 33/30/36 dB, tx -3 dBm
  c.port_gain_offset_db = {0, 0, -2};
  const auto cap = simulate_capture(c, {});
  for (const auto& r : cap.records) {
    CHECK(std::abs(int(r.agc) - 28) <= 1);
    CHECK(std::abs(int(r.rssi[0]) - 36) <= 1);
    CHECK(std::abs(int(r.rssi[1]) - 39) <= 1);
    CHECK(std::abs(int(r.rssi[2]) - 31) <= 1);
  }
}

TEST_CASE("captures are deterministic per seed") {
  SimConfig c;
  c.n_packets = 25;
  const auto a = simulate_capture(c, {});
  const auto b = simulate_capture(c, {});
  CHECK(a.records == b.records);
  c.seed = 2;
  CHECK_FALSE(simulate_capture(c, {}).records == a.records);
  for (const auto& r : a.records) CHECK_NOTHROW(validate(r));
}

TEST_CASE("differential phase cancels common distortions without noise") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-400, 400);
  for (int trial = 0; trial < 5; ++trial) {
    auto c = quiet({30, 40, 50});
    c.n_packets = 1000;
    c.multipath = {{1.0, 0, 0}, {0.4, 70, 9}};
    const PhaseDistortion d{u(rng), u(rng) / 50, std::abs(u(rng)) / 4, {u(rng), u(rng), u(rng)}};
    const auto cap = simulate_capture(c, d);
    for (PortPair pair : {PortPair{1, 0}, PortPair{2, 1}, PortPair{0, 2}}) {
      const auto first = differential_phase(cap.analog.front(), pair);
      double drift = 0.0;
      for (const auto& m : cap.analog) {
        const auto row = differential_phase(m, pair);
        for (int k = 0; k < kSubcarriers; ++k) drift = std::max(drift, std::abs(wrap_deg(*row[k] - *first[k])));
      }
      CHECK(drift <= 1e-9);
      CHECK(std::abs(wrap_deg(*first[0] - wrap_deg(d.delta_deg[pair.num] - d.delta_deg[pair.ref]))) < 1e-9);
    }
  }
}

TEST_CASE("calibrated analog amplitude equals ground truth") {
  auto c = quiet({33, 30, 36});
  c.multipath = {{1.0, 0, 0}, {0.5, 40, 11}, {0.2, -90, 23}};
  c.n_packets = 10;
  const auto cap = simulate_capture(c, {});
  for (std::size_t i = 0; i < cap.records.size(); ++i) {
    const auto f = calibrate(cap.records[i], cap.analog[i], c.constants());
    for (int p = 0; p < 3; ++p)
      for (int k = 0; k < kSubcarriers; ++k)
        CHECK(std::abs(*f.amplitude(k, p, 0) - cap.true_power_dbm[p][k]) < 1e-6);
  }
}

TEST_CASE("weak ports quantize to zero") {
  SimConfig c;
  c.attenuation_db = {30, 80, 80};
  const auto cap = simulate_capture(c, {});
  CHECK(zero_fraction(cap, 1) >= 0.9);
  CHECK(zero_fraction(cap, 2) >= 0.9);
  CHECK(zero_fraction(cap, 0) < 0.01);

  for (std::array<double, 3> att : {std::array<double, 3>{33, 30, 36}, {40, 43, 46}, {50, 56, 53}, {60, 60, 60}}) {
    c.attenuation_db = att;
    const auto q = simulate_capture(c, {});
    for (int p = 0; p < 3; ++p) CHECK(zero_fraction(q, p) < 0.01);
  }
}

TEST_CASE("config validation") {
  SimConfig c;
  c.n_packets = 0;
  CHECK_ERROR_CODE(c.validate(), ErrorCode::ConfigError);
  c = {};
  c.agc_min_db = 63;
  CHECK_ERROR_CODE(c.validate(), ErrorCode::ConfigError);
  c = {};
  c.multipath.clear();
  CHECK_ERROR_CODE(c.validate(), ErrorCode::ConfigError);
  c = {};
  c.multipath = {{1, 0, 0}, {1, 180, 0}};
  CHECK_ERROR_CODE(simulate_capture(c, {}), ErrorCode::ConfigError);
}

TEST_CASE("sweeps") {
  SimConfig base;
  base.n_packets = 20;
  const auto g1 = group_one_sweep(base);
  const auto g2 = group_two_sweep(base);
  CHECK(g1.size() == 14);
  CHECK(g2.size() == 17);
  CHECK(g1.front().attenuation_db == std::array<double, 3>{16, 16, 16});
  CHECK(g1.back().attenuation_db == std::array<double, 3>{80, 80, 80});
  CHECK(g2.front().attenuation_db == std::array<double, 3>{23, 50, 50});
  for (std::size_t i = 0; i < g2.size(); ++i) CHECK(g2[i].seed == base.seed + i);

  CHECK_ERROR_CODE(run_sweep(std::span<const SimConfig>{}, {}), ErrorCode::ConfigError);

  const auto a = run_sweep(g2, {});
  const auto b = run_sweep(g2, {});
  REQUIRE(a.size() == g2.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].config.attenuation_db == g2[i].attenuation_db);
    CHECK(a[i].verdict.cls == b[i].verdict.cls);
    CHECK(a[i].max_abs_discrepancy_db == b[i].max_abs_discrepancy_db);
    const auto serial = simulate_capture(g2[i], {});
    CHECK(a[i].stats.agc_median == variation_stats(serial.records, g2[i].constants()).agc_median);
  }
}
