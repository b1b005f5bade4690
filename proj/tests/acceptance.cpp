// Acceptance gate: one PASS/FAIL line per criterion; exit status is the failure count.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "csicalib/autocontrol.hpp"
#include "csicalib/chipsim.hpp"
#include "csicalib/ingest.hpp"
#include "csicalib/phase.hpp"
#include "csicalib/powercalib.hpp"
#include "csicalib/quality.hpp"

using namespace csicalib;

namespace {

// Tolerances and limits.
constexpr double kClosureTolDb = 1e-9;
constexpr double kRatioTolDb = 1.5;
constexpr double kQuietAmpStdDb = 0.5;
constexpr double kQuietPhaseStdDeg = 2.0;
constexpr double kKneeFactor = 3.0;
constexpr double kDeadZeroFraction = 0.9;
constexpr double kLiveZeroFraction = 0.01;
constexpr double kDriftTolDeg = 1e-9;
constexpr double kSetOnePhaseMinDeg = 5.0;
constexpr double kSetThreePhaseMaxDeg = 5.0;
constexpr double kSetThreeAmpMaxDb = 0.5;
constexpr double kReferenceFactor = 2.0;
constexpr double kWeakPortGapDb = 20.0;
constexpr double kC1BudgetMs = 1.0;
constexpr double kC3BudgetS = 5.0;
constexpr double kC4BudgetS = 30.0;

const PortPair kCycle[] = {{1, 0}, {2, 1}, {0, 2}};

const std::vector<std::array<double, 3>> kSetOne = {{23, 50, 50}, {26, 56, 40}};
const std::vector<std::array<double, 3>> kSetTwo = {{40, 20, 30}, {30, 40, 50}, {50, 50, 30}, {56, 40, 36}, {50, 60, 40}};
const std::vector<std::array<double, 3>> kSetThree = {{60, 56, 66}, {53, 50, 63}, {23, 26, 20},
                                                      {40, 43, 46}, {33, 30, 36}, {50, 56, 53}};

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string num(double v, int prec = 3) {
  char b[64];
  std::snprintf(b, sizeof b, "%.*f", prec, v);
  return b;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SimConfig at(std::array<double, 3> att, std::uint64_t seed = 1) {
  SimConfig c;
  c.attenuation_db = att;
  c.seed = seed;
  return c;
}

double mean_amp_std(const VariationStats& st, int port) { return st.port(port)->mean_amp_std().value_or(INFINITY); }
double mean_phase_std(const VariationStats& st, PortPair pair) {
  return st.pair(pair)->mean_phase_std().value_or(INFINITY);
}

double weak_zero_fraction(const SimCapture& cap, int port) {
  std::size_t z = 0, n = 0;
  for (const auto& r : cap.records)
    for (int k = 0; k < kSubcarriers; ++k) {
      z += r.at(k, port, 0).is_zero();
      ++n;
    }
  return double(z) / double(n);
}

RawCsiRecord random_record(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dim(1, 3), byte(0, 255), comp(-128, 127);
  RawCsiRecord r = make_record(dim(rng), dim(rng));
  r.timestamp_low = static_cast<std::uint32_t>(rng());
  r.bfee_count = static_cast<std::uint16_t>(rng());
  for (int p = 0; p < r.n_rx; ++p) r.rssi[p] = static_cast<std::uint8_t>(byte(rng));
  r.noise = static_cast<std::int8_t>(byte(rng) - 128);
  r.agc = static_cast<std::uint8_t>(byte(rng));
  std::array<std::uint8_t, 3> perm{0, 1, 2};
  std::shuffle(perm.begin(), perm.begin() + r.n_rx, rng);
  for (int i = r.n_rx; i < 3; ++i) perm[i] = static_cast<std::uint8_t>(byte(rng) & 3);
  r.antenna_perm = perm;
  r.rate_flags = static_cast<std::uint16_t>(rng());
  for (auto& s : r.csi) s = {static_cast<std::int8_t>(comp(rng)), static_cast<std::int8_t>(comp(rng))};
  return r;
}

Outcome c1_rssi_table() {
  Outcome o;
  const int in[5][2] = {{37, 62}, {38, 62}, {36, 28}, {39, 28}, {31, 28}};
  const double want[5] = {-69, -68, -36, -33, -41};
  const CalibrationConstants consts{};
  const auto t0 = std::chrono::steady_clock::now();
  double got[5];
  for (int i = 0; i < 5; ++i) got[i] = rssi_to_dbm(in[i][0], in[i][1], consts);
  const double ms = seconds_since(t0) * 1e3;
  for (int i = 0; i < 5; ++i) o.require(got[i] == want[i], "row " + std::to_string(i) + " gave " + num(got[i]));
  o.require(ms < kC1BudgetMs, "took " + num(ms) + " ms");
  if (o.pass) o.detail = "5/5 exact, " + num(ms, 4) + " ms";
  return o;
}

Outcome c2_closure() {
  Outcome o;
  std::mt19937_64 rng(2);
  const CalibrationConstants consts{};
  double worst = 0.0;
  int n = 0;
  while (n < 1000) {
    auto r = random_record(rng);
    if (r.agc == 0 || r.present_ports().empty()) continue;
    double e = 0.0;
    for (int p : r.present_ports()) e += r.matrix().row_power(p);
    if (e == 0.0) continue;
    const auto f = calibrate(r, consts);
    double mw = 0.0;
    for (const auto& a : f.amplitude_dbm)
      if (a) mw += std::pow(10.0, *a / 10.0);
    worst = std::max(worst, std::abs(10.0 * std::log10(mw) - f.total_power_dbm));
    ++n;
  }
  o.require(worst <= kClosureTolDb, "max error " + num(worst, 12) + " dB");
  if (o.pass) o.detail = "1000 records, max error " + num(worst * 1e12, 3) + "e-12 dB";
  return o;
}

Outcome c3_ratio_identity() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::uint64_t seed = 300;
  for (const auto& att : kSetThree) {
    const auto cfg = at(att, seed++);
    const auto cap = simulate_capture(cfg, {});
    for (const auto& r : cap.records)
      for (const auto& c : check_ratio_consistency(r, cfg.constants()))
        worst = std::max(worst, std::abs(c.discrepancy_db));
  }
  const double s = seconds_since(t0);
  o.require(worst <= kRatioTolDb, "max |discrepancy| " + num(worst) + " dB");
  o.require(s < kC3BudgetS, "took " + num(s) + " s");
  if (o.pass) o.detail = "6 configs x 100 packets, max |discrepancy| " + num(worst) + " dB, " + num(s) + " s";
  return o;
}

Outcome c4_variation_trend() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = run_sweep(group_one_sweep(SimConfig{}), {});
  const double s = seconds_since(t0);
  const SweepRow *r40 = nullptr, *r66 = nullptr, *r80 = nullptr;
  double worst_amp = 0.0, worst_phase = 0.0;
  for (const auto& r : rows) {
    const double a = r.config.attenuation_db[0];
    if (a == 40) r40 = &r;
    if (a == 66) r66 = &r;
    if (a == 80) r80 = &r;
    if (a > 50) continue;
    for (int p = 0; p < 3; ++p) worst_amp = std::max(worst_amp, mean_amp_std(r.stats, p));
    for (auto pair : kCycle) worst_phase = std::max(worst_phase, mean_phase_std(r.stats, pair));
  }
  o.require(worst_amp < kQuietAmpStdDb, "amp STD up to 50 dB reaches " + num(worst_amp));
  o.require(worst_phase < kQuietPhaseStdDeg, "phase STD up to 50 dB reaches " + num(worst_phase));
  double min_knee = INFINITY;
  for (auto pair : kCycle) {
    const double knee = mean_phase_std(r66->stats, pair) / mean_phase_std(r40->stats, pair);
    min_knee = std::min(min_knee, knee);
    o.require(knee >= kKneeFactor, pair.label() + " 66/40 ratio " + num(knee));
    o.require(mean_phase_std(r80->stats, pair) > mean_phase_std(r66->stats, pair), pair.label() + " phase 80 <= 66");
  }
  for (int p = 0; p < 3; ++p)
    o.require(mean_amp_std(r80->stats, p) > mean_amp_std(r66->stats, p), "amp 80 <= 66 on port " + std::to_string(p + 1));
  o.require(s < kC4BudgetS, "took " + num(s) + " s");
  if (o.pass) {
    o.detail = "<=50 dB: amp " + num(worst_amp) + " dB, phase " + num(worst_phase) + " deg; 66/40 ratio >= " +
               num(min_knee, 2) + "; " + num(s) + " s";
  }
  return o;
}

Outcome c5_zero_threshold() {
  Outcome o;
  const auto dead_cfg = at({30, 80, 80});
  const auto dead = simulate_capture(dead_cfg, {});
  const double z = std::min(weak_zero_fraction(dead, 1), weak_zero_fraction(dead, 2));
  o.require(z >= kDeadZeroFraction, "weak-port zero fraction " + num(z));
  const auto consts = dead_cfg.constants();
  const auto v = classify(variation_stats(dead.records, consts),
                          estimate_port_loss(dead.records, dead_cfg.tx_power_dbm, consts), consts);
  o.require(v.cls == Verdict::PhaseUnmeasurable, "verdict " + std::string(to_string(v.cls)));

  std::vector<std::array<double, 3>> balanced = kSetThree;
  for (double a : {16, 19, 20, 26, 30, 36, 40, 46, 50, 56, 60, 66, 70, 80}) balanced.push_back({a, a, a});
  double worst = 0.0;
  std::uint64_t seed = 500;
  for (const auto& att : balanced) {
    const auto cap = simulate_capture(at(att, seed++), {});
    for (int p = 0; p < 3; ++p) worst = std::max(worst, weak_zero_fraction(cap, p));
  }
  o.require(worst < kLiveZeroFraction, "balanced settings reach zero fraction " + num(worst, 4));
  if (o.pass) {
    o.detail = "(30,80,80) zeros " + num(100 * z, 1) + "%, PhaseUnmeasurable; " + std::to_string(balanced.size()) +
               " balanced settings max zeros " + num(100 * worst, 2) + "%";
  }
  return o;
}

Outcome c6_agc_clamp() {
  Outcome o;
  auto median_agc = [](const SimConfig& c) { return variation_stats(simulate_capture(c, {}).records, c.constants()).agc_median; };
  const int lo = median_agc(at({16, 16, 16}));
  const int hi = median_agc(at({80, 80, 80}));
  const int mid = median_agc(at({33, 30, 36}));
  o.require(lo == 26, "16 dB reads " + std::to_string(lo));
  o.require(hi == 63, "80 dB reads " + std::to_string(hi));
  o.require(std::abs(mid - 28) <= 1, "(33,30,36) reads " + std::to_string(mid));
  if (o.pass) o.detail = "16 dB -> " + std::to_string(lo) + ", 80 dB -> " + std::to_string(hi) + ", (33,30,36) -> " + std::to_string(mid);
  return o;
}

Outcome c7_cancellation() {
  Outcome o;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-360, 360);
  double worst = 0.0;
  for (int trial = 0; trial < 4; ++trial) {
    SimConfig c = at({30, 45, 52}, 70 + trial);
    c.noise_floor_dbm = -std::numeric_limits<double>::infinity();
    c.n_packets = 1000;
    c.multipath = {{1.0, 0, 0}, {0.6, u(rng), 7}};
    const PhaseDistortion d{u(rng), u(rng) / 40, std::abs(u(rng)) / 3, {u(rng), u(rng), u(rng)}};
    const auto cap = simulate_capture(c, d);
    for (auto pair : kCycle) {
      const auto ref = differential_phase(cap.analog.front(), pair);
      for (const auto& m : cap.analog) {
        const auto row = differential_phase(m, pair);
        for (int k = 0; k < kSubcarriers; ++k) worst = std::max(worst, std::abs(wrap_deg(*row[k] - *ref[k])));
      }
    }
  }
  o.require(worst <= kDriftTolDeg, "drift " + num(worst, 12) + " deg");
  if (o.pass) o.detail = "4 distortion draws x 1000 packets, max drift " + num(worst * 1e12, 3) + "e-12 deg";
  return o;
}

Outcome c8_round_trip() {
  Outcome o;
  std::mt19937_64 rng(8);
  std::vector<RawCsiRecord> recs;
  for (int i = 0; i < 1000; ++i) recs.push_back(random_record(rng));
  o.require(parse_binary_trace(encode_binary_trace(recs)) == recs, "binary round trip differs");
  o.require(parse_text_trace(write_text_trace(recs)) == recs, "text round trip differs");
  for (int rx = 1; rx <= 3; ++rx)
    for (int tx = 1; tx <= 3; ++tx) {
      const auto want = static_cast<std::size_t>((30 * (rx * tx * 16 + 3) + 7) / 8);
      o.require(packed_csi_length(rx, tx) == want, "length for " + std::to_string(rx) + "x" + std::to_string(tx));
    }
  o.require(packed_csi_length(1, 1) == 72 && packed_csi_length(3, 1) == 192, "reference lengths");
  if (o.pass) o.detail = "1000 records binary + text, 9 length cases";
  return o;
}

bool brute_feasible(const std::array<double, 3>& l, const ControlThresholds& th) {
  for (int a = 0; a <= 60; ++a)
    for (int b = 0; b <= 60; ++b)
      for (int c = 0; c <= 60; ++c) {
        const std::array<double, 3> f{l[0] + a, l[1] + b, l[2] + c};
        const auto [lo, hi] = std::minmax_element(f.begin(), f.end());
        if (*hi <= th.max_loss_db && *hi - *lo <= th.max_spread_db && *lo >= th.min_loss_db) return true;
      }
  return false;
}

Outcome c9_control() {
  Outcome o;
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> u(15, 90);
  const ControlThresholds th;
  int feasible = 0, reached = 0, max_iters_used = 0;
  double max_applied = 0.0;
  for (int i = 0; i < 100; ++i) {
    const std::array<double, 3> l{double(u(rng)), double(u(rng)), double(u(rng))};
    const auto act = recommend(PortLosses{l[0], l[1], l[2]}, th);
    const bool brute = brute_feasible(l, th);
    o.require(act.feasible == brute, "feasibility mismatch at case " + std::to_string(i));
    if (!brute) continue;
    ++feasible;
    SimConfig c = at(l, 900 + i);
    const auto tr = closed_loop(c, {}, th, {}, 5);
    for (const auto& s : tr) {
      if (s.iteration > 1) max_applied = std::max(max_applied, s.config.max_attenuation());
      if (s.action.feasible) {
        for (int p = 0; p < 3; ++p) {
          const double after = s.config.attenuation_db[p] + s.action.added_attenuation_db[p];
          if (s.action.added_attenuation_db[p] > 0) max_applied = std::max(max_applied, after);
        }
      }
    }
    max_iters_used = std::max(max_iters_used, static_cast<int>(tr.size()));
    if (tr.back().verdict.cls == Verdict::Reliable) {
      ++reached;
    } else {
      o.require(false, "case " + std::to_string(i) + " ended " + std::string(to_string(tr.back().verdict.cls)));
    }
  }
  o.require(max_applied <= th.max_loss_db, "applied attenuation reached " + num(max_applied, 1));
  if (o.pass) {
    o.detail = std::to_string(feasible) + " feasible of 100, " + std::to_string(reached) + " reached Reliable in <= " +
               std::to_string(max_iters_used) + " iterations, max applied " + num(max_applied, 0) + " dB";
  }
  return o;
}

Outcome c10_partition() {
  Outcome o;
  auto rows_for = [](const std::vector<std::array<double, 3>>& set, std::uint64_t seed) {
    std::vector<SimConfig> cfgs;
    for (const auto& a : set) cfgs.push_back(at(a, seed++));
    return run_sweep(cfgs, {});
  };
  const auto s1 = rows_for(kSetOne, 1000);
  const auto s2 = rows_for(kSetTwo, 1100);
  const auto s3 = rows_for(kSetThree, 1200);

  double min_weak = INFINITY;
  for (const auto& r : s1) {
    const auto& a = r.config.attenuation_db;
    const double strongest = *std::min_element(a.begin(), a.end());
    for (auto pair : kCycle) {
      const bool weak = a[pair.num] - strongest >= kWeakPortGapDb || a[pair.ref] - strongest >= kWeakPortGapDb;
      if (!weak) continue;
      const double s = mean_phase_std(r.stats, pair);
      min_weak = std::min(min_weak, s);
      o.require(s > kSetOnePhaseMinDeg, "Set 1 weak pair " + pair.label() + " phase STD " + num(s));
    }
    o.require(r.verdict.cls != Verdict::Reliable, "Set 1 row classified Reliable");
  }
  for (const auto& r : s2) o.require(r.verdict.cls != Verdict::Reliable, "Set 2 row classified Reliable");

  int quiet_rows = 0;
  for (const auto& r : s3) {
    const auto& a = r.config.attenuation_db;
    const auto [lo, hi] = std::minmax_element(a.begin(), a.end());
    if (*hi - *lo > 10.0 || *hi > 60.0) continue;
    ++quiet_rows;
    for (auto pair : kCycle) o.require(mean_phase_std(r.stats, pair) < kSetThreePhaseMaxDeg, "Set 3 phase STD");
    for (int p = 0; p < 3; ++p) o.require(mean_amp_std(r.stats, p) < kSetThreeAmpMaxDb, "Set 3 amp STD");
    const bool pinned = r.stats.agc_median <= r.config.agc_min_db;
    const auto want = pinned ? Verdict::AgcSaturatedLow : Verdict::Reliable;
    o.require(r.verdict.cls == want, "Set 3 row verdict " + std::string(to_string(r.verdict.cls)));
  }
  o.require(quiet_rows == 4, "expected 4 Set 3 rows within limits");

  // Published reference rows.
  const double amp_ref[3] = {0.20, 0.20, 0.24}, phase_ref[3] = {1.48, 1.62, 1.76};
  const auto& r33 = s3[4];
  for (int p = 0; p < 3; ++p)
    o.require(mean_amp_std(r33.stats, p) <= kReferenceFactor * amp_ref[p], "(33,30,36) amp beyond 2x");
  for (int i = 0; i < 3; ++i)
    o.require(mean_phase_std(r33.stats, kCycle[i]) <= kReferenceFactor * phase_ref[i], "(33,30,36) phase beyond 2x");
  const double set1_ref[3] = {8.77, 13.35, 9.91};
  for (int i = 0; i < 3; ++i)
    o.require(mean_phase_std(s1[0].stats, kCycle[i]) <= kReferenceFactor * set1_ref[i], "(23,50,50) phase beyond 2x");

  if (o.pass) {
    o.detail = "Set 1 weak-pair phase STD >= " + num(min_weak, 2) + " deg; Sets 1-2 not Reliable; " +
               std::to_string(quiet_rows) + " Set 3 rows quiet";
  }
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"C1  rssi-to-dBm table", c1_rssi_table},
      {"C2  amplitude closure", c2_closure},
      {"C3  rssi/csi ratio identity", c3_ratio_identity},
      {"C4  variation trend", c4_variation_trend},
      {"C5  zero-CSI threshold", c5_zero_threshold},
      {"C6  agc clamp", c6_agc_clamp},
      {"C7  differential cancellation", c7_cancellation},
      {"C8  parser round trip", c8_round_trip},
      {"C9  control loop", c9_control},
      {"C10 std partition", c10_partition},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += !o.pass;
    std::printf("%s %-32s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures;
}
