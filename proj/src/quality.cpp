#include "csicalib/quality.hpp"

#include <algorithm>
#include <cmath>

#include "csicalib/error.hpp"
#include "csicalib/phase.hpp"
#include "csicalib/powercalib.hpp"

namespace csicalib {

namespace {

std::optional<double> mean_of(const std::vector<std::optional<double>>& v) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& x : v) {
    if (!x) continue;
    sum += *x;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace

std::optional<double> PortVariation::mean_amp_std() const { return mean_of(amp_std_db); }
std::optional<double> PairVariation::mean_phase_std() const { return mean_of(phase_std_deg); }

const PortVariation* VariationStats::port(int p) const {
  for (const auto& pv : ports) {
    if (pv.port == p) return &pv;
  }
  return nullptr;
}

const PairVariation* VariationStats::pair(PortPair p) const {
  for (const auto& pv : pairs) {
    if (pv.pair == p) return &pv;
  }
  return nullptr;
}

VariationStats variation_stats(std::span<const RawCsiRecord> records, const CalibrationConstants& consts) {
  if (records.size() < 2) fail(ErrorCode::InsufficientData, "variation statistics need at least two records");
  const auto ports = records.front().present_ports();
  for (const auto& r : records) {
    if (r.present_ports() != ports || r.n_tx != records.front().n_tx) {
      fail(ErrorCode::InsufficientData, "capture mixes antenna configurations");
    }
  }

  VariationStats st;
  st.n_packets = records.size();

  std::vector<CalibratedFrame> frames;
  frames.reserve(records.size());
  for (const auto& r : records) frames.push_back(calibrate(r, consts));

  std::vector<int> agcs;
  for (const auto& r : records) agcs.push_back(r.agc);
  std::sort(agcs.begin(), agcs.end());
  st.agc_median = agcs[agcs.size() / 2];

  const int n_tx = records.front().n_tx;
  std::vector<double> values;
  for (int p : ports) {
    PortVariation pv;
    pv.port = p;
    std::size_t zeros = 0;
    std::size_t total = 0;
    for (const auto& r : records) {
      for (int k = 0; k < kSubcarriers; ++k) {
        for (int tx = 0; tx < n_tx; ++tx) {
          zeros += r.at(k, p, tx).is_zero() ? 1 : 0;
          ++total;
        }
      }
    }
    pv.zero_fraction = static_cast<double>(zeros) / static_cast<double>(total);
    for (int k = 0; k < kSubcarriers; ++k) {
      values.clear();
      for (const auto& f : frames) {
        if (const auto& a = f.amplitude(k, p, 0)) values.push_back(*a);
      }
      if (values.size() < 2) {
        pv.amp_mean_dbm.push_back(std::nullopt);
        pv.amp_std_db.push_back(std::nullopt);
        continue;
      }
      // Sorting makes the sums independent of packet order.
      std::sort(values.begin(), values.end());
      double mean = 0.0;
      for (double x : values) mean += x;
      mean /= static_cast<double>(values.size());
      double var = 0.0;
      for (double x : values) var += (x - mean) * (x - mean);
      pv.amp_mean_dbm.push_back(mean);
      pv.amp_std_db.push_back(std::sqrt(var / static_cast<double>(values.size())));
    }
    st.ports.push_back(std::move(pv));
  }

  for (const auto& pair : default_pairs(ports)) {
    PairVariation pv;
    pv.pair = pair;
    const auto series = differential_phase_series(records, pair);
    for (int k = 0; k < kSubcarriers; ++k) {
      values.clear();
      for (std::size_t t = 0; t < series.n_packets; ++t) {
        if (const auto& ph = series.at(t, k)) values.push_back(*ph);
      }
      if (values.size() < 2) {
        pv.phase_mean_deg.push_back(std::nullopt);
        pv.phase_std_deg.push_back(std::nullopt);
        continue;
      }
      std::sort(values.begin(), values.end());
      const auto cs = circular_stats(values);
      pv.phase_mean_deg.push_back(cs.mean_deg);
      pv.phase_std_deg.push_back(cs.std_deg);
    }
    st.pairs.push_back(std::move(pv));
  }
  return st;
}

PortLosses estimate_port_loss(std::span<const RawCsiRecord> records, double tx_power_dbm,
                              const CalibrationConstants& consts) {
  if (records.empty()) fail(ErrorCode::InsufficientData, "no records");
  PortLosses out{};
  for (int p = 0; p < kMaxPorts; ++p) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : records) {
      if (!r.port_present(p)) continue;
      sum += rssi_to_dbm(r.rssi[p], r.agc, consts);
      ++n;
    }
    if (n > 0) out[p] = tx_power_dbm - sum / static_cast<double>(n);
  }
  return out;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Reliable: return "Reliable";
    case Verdict::Degraded: return "Degraded";
    case Verdict::AgcSaturatedLow: return "AgcSaturatedLow";
    case Verdict::AgcSaturatedHigh: return "AgcSaturatedHigh";
    case Verdict::Unstable: return "Unstable";
    case Verdict::PhaseUnmeasurable: return "PhaseUnmeasurable";
  }
  return "Unknown";
}

std::optional<Verdict> verdict_from_string(std::string_view s) {
  for (auto v : {Verdict::Reliable, Verdict::Degraded, Verdict::AgcSaturatedLow, Verdict::AgcSaturatedHigh,
                 Verdict::Unstable, Verdict::PhaseUnmeasurable}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

int severity(Verdict v) {
  switch (v) {
    case Verdict::Reliable: return 0;
    case Verdict::Degraded: return 1;
    case Verdict::AgcSaturatedLow: return 2;
    case Verdict::AgcSaturatedHigh: return 3;
    case Verdict::Unstable: return 4;
    case Verdict::PhaseUnmeasurable: return 5;
  }
  return 0;
}

Verdict class_from_reasons(std::span<const Reason> reasons) {
  Verdict out = Verdict::Reliable;
  for (const auto& r : reasons) {
    if (severity(r.effect) > severity(out)) out = r.effect;
  }
  return out;
}

QualityVerdict classify(const VariationStats& stats, const PortLosses& losses, const CalibrationConstants& consts,
                        const Thresholds& th) {
  QualityVerdict v;
  std::vector<double> present;
  for (const auto& l : losses) {
    if (l) present.push_back(*l);
  }

  if (!present.empty()) {
    const auto [lo, hi] = std::minmax_element(present.begin(), present.end());
    const double spread = *hi - *lo;
    if (spread > th.phase_spread_db) {
      v.reasons.push_back({"pairwise_loss_difference_db", th.phase_spread_db, spread, Verdict::PhaseUnmeasurable});
    } else if (spread > th.max_spread_db) {
      v.reasons.push_back({"pairwise_loss_difference_db", th.max_spread_db, spread, Verdict::Degraded});
    }
    if (*hi > th.max_loss_db) {
      v.reasons.push_back({"max_loss_db", th.max_loss_db, *hi, Verdict::Unstable});
    }
    if (*lo < th.min_loss_db) {
      v.reasons.push_back({"min_loss_db", th.min_loss_db, *lo, Verdict::AgcSaturatedLow});
    }
  }
  for (const auto& pv : stats.ports) {
    if (pv.zero_fraction > th.max_zero_fraction) {
      v.reasons.push_back({"zero_fraction_port" + std::to_string(pv.port + 1), th.max_zero_fraction,
                           pv.zero_fraction, Verdict::PhaseUnmeasurable});
    }
  }
  if (stats.agc_median <= consts.agc_min) {
    v.reasons.push_back({"agc_pinned_min", static_cast<double>(consts.agc_min),
                         static_cast<double>(stats.agc_median), Verdict::AgcSaturatedLow});
  }
  if (stats.agc_median >= consts.agc_max) {
    v.reasons.push_back({"agc_pinned_max", static_cast<double>(consts.agc_max),
                         static_cast<double>(stats.agc_median), Verdict::AgcSaturatedHigh});
  }
  v.cls = class_from_reasons(v.reasons);
  return v;
}

}  // namespace csicalib
