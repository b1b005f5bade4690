#include "csicalib/chipsim.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "csicalib/error.hpp"

namespace csicalib {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

std::complex<double> unit_phasor(double deg) { return std::polar(1.0, std::fmod(deg, 360.0) * kDegToRad); }

double db_to_linear_power(double db) { return std::pow(10.0, db / 10.0); }

std::vector<std::complex<double>> unit_channel(const std::vector<Tap>& taps) {
  std::vector<std::complex<double>> h(kSubcarriers);
  double gain_power = 0.0;
  for (const auto& tap : taps) gain_power += tap.gain * tap.gain;
  double mean_power = 0.0;
  for (int k = 0; k < kSubcarriers; ++k) {
    std::complex<double> sum{};
    for (const auto& tap : taps) sum += tap.gain * unit_phasor(tap.phase_deg - tap.delay_deg_per_subcarrier * k);
    h[static_cast<std::size_t>(k)] = sum;
    mean_power += std::norm(sum);
  }
  mean_power /= kSubcarriers;
  if (!(mean_power > 1e-12 * gain_power)) fail(ErrorCode::ConfigError, "multipath taps cancel on every subcarrier");
  const double norm = 1.0 / std::sqrt(mean_power);
  for (auto& x : h) x *= norm;
  return h;
}

std::int8_t quantize_component(double x) {
  const double r = std::clamp(std::round(x), -128.0, 127.0);
  return static_cast<std::int8_t>(r);
}

}  // namespace

void SimConfig::validate() const {
  if (n_packets < 1) fail(ErrorCode::ConfigError, "n_packets must be at least 1");
  if (multipath.empty()) fail(ErrorCode::ConfigError, "at least one multipath tap is required");
  if (!(noise_floor_dbm < tx_power_dbm)) fail(ErrorCode::ConfigError, "noise floor must lie below tx power");
  if (!(agc_min_db < agc_max_db)) fail(ErrorCode::ConfigError, "agc_min_db must be below agc_max_db");
  if (!(adc_ref_amplitude > 0.0)) fail(ErrorCode::ConfigError, "adc_ref_amplitude must be positive");
  for (double a : attenuation_db) {
    if (!std::isfinite(a)) fail(ErrorCode::ConfigError, "attenuation must be finite");
  }
  for (const auto& t : multipath) {
    if (!std::isfinite(t.gain) || !std::isfinite(t.phase_deg) || !std::isfinite(t.delay_deg_per_subcarrier)) {
      fail(ErrorCode::ConfigError, "multipath tap values must be finite");
    }
  }
}

double SimConfig::max_attenuation() const {
  return *std::max_element(attenuation_db.begin(), attenuation_db.end());
}

int agc_readout(double strongest_port_dbm, const SimConfig& config) {
  if (!std::isfinite(strongest_port_dbm)) return config.agc_max_db;
  const double wanted = std::round(config.adc_target_dbm - strongest_port_dbm);
  return static_cast<int>(std::clamp(wanted, static_cast<double>(config.agc_min_db),
                                     static_cast<double>(config.agc_max_db)));
}

SimCapture simulate_capture(const SimConfig& cfg, const PhaseDistortion& dist) {
  cfg.validate();
  const auto h = unit_channel(cfg.multipath);

  std::array<double, 3> amplitude{};  // sqrt(mW) per subcarrier before the channel shape
  SimCapture cap;
  for (int p = 0; p < kMaxPorts; ++p) {
    const double port_dbm = cfg.tx_power_dbm - cfg.attenuation_db[p] + cfg.port_gain_offset_db[p];
    amplitude[p] = std::sqrt(db_to_linear_power(port_dbm) / kSubcarriers);
    auto& truth = cap.true_power_dbm[p];
    truth.resize(kSubcarriers);
    for (int k = 0; k < kSubcarriers; ++k) {
      truth[static_cast<std::size_t>(k)] = 10.0 * std::log10(amplitude[p] * amplitude[p] * std::norm(h[k]));
    }
  }
  std::array<std::complex<double>, 3> pll{};
  for (int p = 0; p < kMaxPorts; ++p) pll[p] = unit_phasor(dist.delta_deg[p]);

  const bool noisy = std::isfinite(cfg.noise_floor_dbm);
  const double noise_sigma = noisy ? std::sqrt(db_to_linear_power(cfg.noise_floor_dbm) / 2.0) : 0.0;

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const auto consts = cfg.constants();
  const double noise_byte = noisy ? std::clamp(std::round(cfg.noise_floor_dbm), -128.0, 127.0) : -128.0;

  cap.records.reserve(static_cast<std::size_t>(cfg.n_packets));
  cap.analog.reserve(static_cast<std::size_t>(cfg.n_packets));
  std::array<std::complex<double>, kSubcarriers> common{};
  std::array<std::array<std::complex<double>, kSubcarriers>, 3> rx{};

  for (int t = 0; t < cfg.n_packets; ++t) {
    const double pdd_edge = dist.pdd_jitter_deg * gauss(rng);
    for (int k = 0; k < kSubcarriers; ++k) {
      const double deg = std::fmod(dist.cfo_rate_deg * t, 360.0) + std::fmod(dist.sfo_slope_deg * k * t, 360.0) +
                         pdd_edge * k / (kSubcarriers - 1);
      common[k] = unit_phasor(deg);
    }

    std::array<double, 3> measured_dbm{};
    for (int p = 0; p < kMaxPorts; ++p) {
      double power = 0.0;
      for (int k = 0; k < kSubcarriers; ++k) {
        auto y = amplitude[p] * h[k] * common[k] * pll[p];
        if (noisy) {
          const double re = gauss(rng);
          const double im = gauss(rng);
          y += noise_sigma * std::complex<double>(re, im);
        }
        rx[p][k] = y;
        power += std::norm(y);
      }
      measured_dbm[p] = power > 0.0 ? 10.0 * std::log10(power) : -std::numeric_limits<double>::infinity();
    }

    const double strongest = *std::max_element(measured_dbm.begin(), measured_dbm.end());
    const int agc = agc_readout(strongest, cfg);
    const double scale = cfg.adc_ref_amplitude * std::pow(10.0, (agc - cfg.adc_target_dbm) / 20.0) *
                         std::sqrt(static_cast<double>(kSubcarriers));

    RawCsiRecord rec = make_record(kMaxPorts, 1);
    rec.timestamp_low = static_cast<std::uint32_t>(static_cast<std::uint64_t>(t) * 1000u);
    rec.bfee_count = static_cast<std::uint16_t>(t & 0xFFFF);
    rec.agc = static_cast<std::uint8_t>(agc);
    rec.noise = static_cast<std::int8_t>(noise_byte);
    for (int p = 0; p < kMaxPorts; ++p) {
      const double rssi = std::isfinite(measured_dbm[p]) ? std::round(measured_dbm[p] + agc + consts.c_fixed) : 1.0;
      rec.rssi[p] = static_cast<std::uint8_t>(std::clamp(rssi, 1.0, 255.0));
    }
    CsiMatrix analog(kMaxPorts, 1);
    for (int k = 0; k < kSubcarriers; ++k) {
      for (int p = 0; p < kMaxPorts; ++p) {
        const auto v = scale * rx[p][k];
        analog(k, p, 0) = v;
        rec.at(k, p, 0) = {quantize_component(v.real()), quantize_component(v.imag())};
      }
    }
    cap.records.push_back(std::move(rec));
    cap.analog.push_back(std::move(analog));
  }
  return cap;
}

namespace {

SweepRow evaluate(const SimConfig& cfg, const PhaseDistortion& dist, const Thresholds& th) {
  const auto cap = simulate_capture(cfg, dist);
  const auto consts = cfg.constants();
  SweepRow row;
  row.config = cfg;
  row.stats = variation_stats(cap.records, consts);
  row.est_loss_db = estimate_port_loss(cap.records, cfg.tx_power_dbm, consts);
  row.verdict = classify(row.stats, row.est_loss_db, consts, th);

  // Pairs are averaged over the packets where both rows carry energy.
  const auto pairs = default_pairs(cap.records.front().present_ports());
  std::vector<std::size_t> counts(pairs.size(), 0);
  for (const auto& pair : pairs) row.mean_ratio.push_back(RatioCheck{pair, 0.0, 0.0, 0.0});
  for (const auto& rec : cap.records) {
    const auto m = rec.matrix();
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto a = m.row(pairs[i].num);
      const auto b = m.row(pairs[i].ref);
      if (m.row_power(pairs[i].num) == 0.0 || m.row_power(pairs[i].ref) == 0.0) continue;
      const double rssi = static_cast<double>(rec.rssi[pairs[i].num]) - static_cast<double>(rec.rssi[pairs[i].ref]);
      const double csi = csi_power_ratio_db(a, b);
      row.mean_ratio[i].rssi_ratio_db += rssi;
      row.mean_ratio[i].csi_ratio_db += csi;
      row.mean_ratio[i].discrepancy_db += csi - rssi;
      row.max_abs_discrepancy_db = std::max(row.max_abs_discrepancy_db, std::abs(csi - rssi));
      ++counts[i];
    }
  }
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    auto& c = row.mean_ratio[i];
    if (counts[i] == 0) {
      c.rssi_ratio_db = c.csi_ratio_db = c.discrepancy_db = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    const double n = static_cast<double>(counts[i]);
    c.rssi_ratio_db /= n;
    c.csi_ratio_db /= n;
    c.discrepancy_db /= n;
  }
  for (int p = 0; p < kMaxPorts; ++p) {
    if (row.est_loss_db[p]) row.rssi_deviation_db[p] = cfg.attenuation_db[p] - *row.est_loss_db[p];
  }
  return row;
}

}  // namespace

std::vector<SweepRow> run_sweep(std::span<const SimConfig> sweep, const PhaseDistortion& distortion,
                                const Thresholds& thresholds) {
  if (sweep.empty()) fail(ErrorCode::ConfigError, "sweep has no configurations");
  for (const auto& cfg : sweep) cfg.validate();
  std::vector<std::future<SweepRow>> jobs;
  jobs.reserve(sweep.size());
  for (const auto& cfg : sweep) {
    jobs.push_back(std::async(std::launch::async, [&cfg, &distortion, &thresholds] {
      return evaluate(cfg, distortion, thresholds);
    }));
  }
  std::vector<SweepRow> rows;
  rows.reserve(jobs.size());
  for (auto& j : jobs) rows.push_back(j.get());
  return rows;
}

std::vector<SimConfig> group_one_sweep(const SimConfig& base) {
  static constexpr double kLevels[] = {16, 19, 20, 26, 30, 36, 40, 46, 50, 56, 60, 66, 70, 80};
  std::vector<SimConfig> out;
  std::uint64_t i = 0;
  for (double a : kLevels) {
    SimConfig c = base;
    c.attenuation_db = {a, a, a};
    c.seed = base.seed + i++;
    out.push_back(c);
  }
  return out;
}

std::vector<SimConfig> group_two_sweep(const SimConfig& base) {
  static constexpr std::array<std::array<double, 3>, 17> kRows = {{
      {23, 50, 50}, {30, 80, 80}, {50, 50, 30}, {26, 56, 40}, {66, 20, 36}, {60, 56, 66},
      {53, 50, 63}, {56, 40, 36}, {23, 60, 30}, {56, 70, 26}, {23, 26, 20}, {40, 43, 46},
      {33, 30, 36}, {50, 56, 53}, {40, 20, 30}, {30, 40, 50}, {50, 60, 40},
  }};
  std::vector<SimConfig> out;
  std::uint64_t i = 0;
  for (const auto& row : kRows) {
    SimConfig c = base;
    c.attenuation_db = row;
    c.seed = base.seed + i++;
    out.push_back(c);
  }
  return out;
}

}  // namespace csicalib
