#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "csicalib/record.hpp"

namespace csicalib {

using PortLosses = std::array<std::optional<double>, 3>;

struct PortVariation {
  int port = 0;
  // Per subcarrier, tx stream 0. nullopt when fewer than two measurable packets.
  std::vector<std::optional<double>> amp_mean_dbm;
  std::vector<std::optional<double>> amp_std_db;
  double zero_fraction = 0.0;  // over all entries of the port, all tx streams

  /// Mean of the available per-subcarrier STDs.
  std::optional<double> mean_amp_std() const;
};

struct PairVariation {
  PortPair pair;
  std::vector<std::optional<double>> phase_mean_deg;
  std::vector<std::optional<double>> phase_std_deg;

  std::optional<double> mean_phase_std() const;
};

struct VariationStats {
  std::size_t n_packets = 0;
  std::vector<PortVariation> ports;  // present ports only, ascending
  std::vector<PairVariation> pairs;  // default pair cycle
  int agc_median = 0;

  const PortVariation* port(int p) const;
  const PairVariation* pair(PortPair p) const;
};

/// Amplitude and phase variation over a static-channel capture.
/// Throws InsufficientData for fewer than two records.
VariationStats variation_stats(std::span<const RawCsiRecord> records, const CalibrationConstants& consts);

/// Per-port loss = tx power - mean calibrated port power.
PortLosses estimate_port_loss(std::span<const RawCsiRecord> records, double tx_power_dbm,
                              const CalibrationConstants& consts);

enum class Verdict { Reliable, Degraded, AgcSaturatedLow, AgcSaturatedHigh, Unstable, PhaseUnmeasurable };

std::string_view to_string(Verdict v);
std::optional<Verdict> verdict_from_string(std::string_view s);

/// Position in the precedence order; larger wins.
int severity(Verdict v);

struct Thresholds {
  double max_loss_db = 60.0;
  double max_spread_db = 10.0;
  double phase_spread_db = 30.0;
  double min_loss_db = 20.0;
  double max_zero_fraction = 0.5;
};

/// One violated criterion. `effect` is the class the criterion implies.
struct Reason {
  std::string criterion;
  double threshold = 0.0;
  double observed = 0.0;
  Verdict effect = Verdict::Reliable;
};

struct QualityVerdict {
  Verdict cls = Verdict::Reliable;
  std::vector<Reason> reasons;
};

/// Highest-precedence effect among reasons, Reliable when there are none.
Verdict class_from_reasons(std::span<const Reason> reasons);

QualityVerdict classify(const VariationStats& stats, const PortLosses& est_port_loss_db,
                        const CalibrationConstants& consts, const Thresholds& thresholds = {});

}  // namespace csicalib
