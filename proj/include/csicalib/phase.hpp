#pragma once

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "csicalib/record.hpp"

namespace csicalib {

/// Wraps an angle in degrees to (-180, 180].
double wrap_deg(double deg);

/// Four-quadrant phase of one CSI entry, degrees in (-180, 180]. Throws ZeroEntry on 0.
double raw_phase(std::complex<double> entry);

/// Per-subcarrier phase difference for one packet; nullopt marks an
/// entry where either port reads exactly zero.
using PhaseRow = std::vector<std::optional<double>>;

/// wrap(phase(num) - phase(ref)) per subcarrier on tx stream `tx`.
/// Throws AbsentPort unless both ports are present.
PhaseRow differential_phase(const RawCsiRecord& record, PortPair pair, int tx = 0);
/// Same on a floating-point CSI tensor; no RSSI presence check.
PhaseRow differential_phase(const CsiMatrix& csi, PortPair pair, int tx = 0);

/// Differential phase over a whole capture, packet-major.
struct DifferentialPhaseSeries {
  PortPair pair;
  std::size_t n_packets = 0;
  std::vector<std::optional<double>> phase_deg;  // n_packets * K

  const std::optional<double>& at(std::size_t packet, int k) const {
    return phase_deg[packet * kSubcarriers + static_cast<std::size_t>(k)];
  }
  bool unmeasurable(std::size_t packet, int k) const { return !at(packet, k).has_value(); }
};

DifferentialPhaseSeries differential_phase_series(std::span<const RawCsiRecord> records, PortPair pair,
                                                  int tx = 0);

struct CircularStats {
  double mean_deg = 0.0;
  double std_deg = 0.0;
};

/// Mean is the direction of the mean unit vector; std is the population
/// standard deviation of deviations wrapped around that mean.
/// Throws InsufficientData for fewer than two angles.
CircularStats circular_stats(std::span<const double> angles_deg);

}  // namespace csicalib
