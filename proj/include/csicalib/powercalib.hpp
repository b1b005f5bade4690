#pragma once

#include <array>
#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "csicalib/record.hpp"

namespace csicalib {

/// Absolute received power of one port: rssi - agc - C.
/// Throws AbsentPort when rssi == 0.
double rssi_to_dbm(int rssi, int agc, const CalibrationConstants& consts);

/// Power sum of per-port dBm values, in dBm.
double total_power(std::span<const double> port_powers_dbm);

/// 10*log10(sum |csi_i|^2 / sum |csi_j|^2).
double csi_power_ratio_db(std::span<const std::complex<double>> csi_i,
                          std::span<const std::complex<double>> csi_j);

struct RatioCheck {
  PortPair pair;
  double rssi_ratio_db = 0.0;  // RSSI_num - RSSI_ref
  double csi_ratio_db = 0.0;
  double discrepancy_db = 0.0;  // csi - rssi
};

/// Compares RSSI and CSI power ratios for the default pair cycle of the present ports.
std::vector<RatioCheck> check_ratio_consistency(const RawCsiRecord& record, const CalibrationConstants& consts);
/// Same, with the CSI taken from `csi` instead of the record's digitized block.
std::vector<RatioCheck> check_ratio_consistency(const RawCsiRecord& record, const CsiMatrix& csi,
                                                const CalibrationConstants& consts);

struct CalibratedFrame {
  int n_rx = 0;
  int n_tx = 0;
  std::array<std::optional<double>, 3> port_power_dbm{};
  double total_power_dbm = 0.0;
  double rho = 0.0;
  /// K * n_rx * n_tx absolute amplitudes; nullopt marks an unmeasurable
  /// entry (zero CSI or absent port).
  std::vector<std::optional<double>> amplitude_dbm;

  const std::optional<double>& amplitude(int k, int rx, int tx) const {
    return amplitude_dbm[static_cast<std::size_t>((k * n_rx + rx) * n_tx + tx)];
  }
};

/// Restores absolute per-subcarrier amplitude using the RSSI-derived scale factor.
CalibratedFrame calibrate(const RawCsiRecord& record, const CalibrationConstants& consts);
CalibratedFrame calibrate(const RawCsiRecord& record, const CsiMatrix& csi, const CalibrationConstants& consts);

}  // namespace csicalib
