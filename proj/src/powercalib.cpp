#include "csicalib/powercalib.hpp"

#include <cmath>
#include <string>

#include "csicalib/error.hpp"

namespace csicalib {

double rssi_to_dbm(int rssi, int agc, const CalibrationConstants& consts) {
  if (rssi == 0) fail(ErrorCode::AbsentPort, "rssi 0 marks an absent port");
  return static_cast<double>(rssi) - static_cast<double>(agc) - consts.c_fixed;
}

double total_power(std::span<const double> port_powers_dbm) {
  if (port_powers_dbm.empty()) fail(ErrorCode::EmptyInput, "no port powers");
  double linear = 0.0;
  for (double p : port_powers_dbm) linear += std::pow(10.0, p / 10.0);
  return 10.0 * std::log10(linear);
}

namespace {

double power_sum(std::span<const std::complex<double>> v) {
  double s = 0.0;
  for (const auto& c : v) s += c.real() * c.real() + c.imag() * c.imag();
  return s;
}

void require_present(const RawCsiRecord& r, int port) {
  if (!r.port_present(port)) fail(ErrorCode::AbsentPort, "port " + std::to_string(port + 1) + " is absent");
}

}  // namespace

double csi_power_ratio_db(std::span<const std::complex<double>> csi_i,
                          std::span<const std::complex<double>> csi_j) {
  if (csi_i.size() != csi_j.size()) fail(ErrorCode::InvariantViolation, "csi vectors differ in length");
  const double den = power_sum(csi_j);
  if (den == 0.0) fail(ErrorCode::ZeroChannel, "reference channel is all zero");
  const double num = power_sum(csi_i);
  if (num == 0.0) fail(ErrorCode::ZeroChannel, "numerator channel is all zero");
  // log10(a) - log10(b) keeps swap antisymmetry exact.
  return 10.0 * std::log10(num) - 10.0 * std::log10(den);
}

std::vector<RatioCheck> check_ratio_consistency(const RawCsiRecord& record, const CalibrationConstants& consts) {
  return check_ratio_consistency(record, record.matrix(), consts);
}

std::vector<RatioCheck> check_ratio_consistency(const RawCsiRecord& record, const CsiMatrix& csi,
                                                const CalibrationConstants&) {
  const auto ports = record.present_ports();
  if (ports.size() < 2) fail(ErrorCode::AbsentPort, "ratio check needs at least two present ports");
  std::vector<RatioCheck> out;
  for (const auto& pair : default_pairs(ports)) {
    require_present(record, pair.num);
    require_present(record, pair.ref);
    RatioCheck rc;
    rc.pair = pair;
    rc.rssi_ratio_db = static_cast<double>(record.rssi[pair.num]) - static_cast<double>(record.rssi[pair.ref]);
    const auto a = csi.row(pair.num);
    const auto b = csi.row(pair.ref);
    rc.csi_ratio_db = csi_power_ratio_db(a, b);
    rc.discrepancy_db = rc.csi_ratio_db - rc.rssi_ratio_db;
    out.push_back(rc);
  }
  return out;
}

CalibratedFrame calibrate(const RawCsiRecord& record, const CalibrationConstants& consts) {
  return calibrate(record, record.matrix(), consts);
}

CalibratedFrame calibrate(const RawCsiRecord& record, const CsiMatrix& csi, const CalibrationConstants& consts) {
  const auto ports = record.present_ports();
  if (ports.empty()) fail(ErrorCode::AbsentPort, "no present port");
  if (record.agc == 0) fail(ErrorCode::AbsentAgc, "record carries no AGC readout");

  CalibratedFrame f;
  f.n_rx = record.n_rx;
  f.n_tx = record.n_tx;
  std::vector<double> powers;
  double squared_sum = 0.0;
  for (int p : ports) {
    const double dbm = rssi_to_dbm(record.rssi[p], record.agc, consts);
    f.port_power_dbm[p] = dbm;
    powers.push_back(dbm);
    squared_sum += csi.row_power(p);
  }
  if (squared_sum == 0.0) fail(ErrorCode::AllZeroCsi, "CSI of all present ports is zero");
  f.total_power_dbm = total_power(powers);
  f.rho = std::pow(10.0, f.total_power_dbm / 10.0) / squared_sum;

  f.amplitude_dbm.assign(static_cast<std::size_t>(kSubcarriers * f.n_rx * f.n_tx), std::nullopt);
  for (int k = 0; k < kSubcarriers; ++k) {
    for (int p : ports) {
      for (int tx = 0; tx < f.n_tx; ++tx) {
        const double mag2 = std::norm(csi(k, p, tx));
        if (mag2 == 0.0) continue;
        f.amplitude_dbm[static_cast<std::size_t>((k * f.n_rx + p) * f.n_tx + tx)] =
            10.0 * std::log10(f.rho * mag2);
      }
    }
  }
  return f;
}

}  // namespace csicalib
