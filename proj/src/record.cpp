#include "csicalib/record.hpp"

#include <algorithm>
#include <string>

#include "csicalib/error.hpp"

namespace csicalib {

CsiMatrix::CsiMatrix(int n_rx, int n_tx)
    : n_rx_(n_rx), n_tx_(n_tx), data_(static_cast<std::size_t>(kSubcarriers * n_rx * n_tx)) {}

double CsiMatrix::row_power(int rx) const {
  double sum = 0.0;
  for (int k = 0; k < kSubcarriers; ++k) {
    for (int tx = 0; tx < n_tx_; ++tx) sum += std::norm((*this)(k, rx, tx));
  }
  return sum;
}

std::vector<std::complex<double>> CsiMatrix::row(int rx) const {
  std::vector<std::complex<double>> out;
  out.reserve(static_cast<std::size_t>(kSubcarriers * n_tx_));
  for (int k = 0; k < kSubcarriers; ++k) {
    for (int tx = 0; tx < n_tx_; ++tx) out.push_back((*this)(k, rx, tx));
  }
  return out;
}

std::vector<int> RawCsiRecord::present_ports() const {
  std::vector<int> ports;
  for (int p = 0; p < n_rx; ++p) {
    if (rssi[p] != 0) ports.push_back(p);
  }
  return ports;
}

CsiMatrix RawCsiRecord::matrix() const {
  CsiMatrix m(n_rx, n_tx);
  for (int k = 0; k < kSubcarriers; ++k) {
    for (int rx = 0; rx < n_rx; ++rx) {
      for (int tx = 0; tx < n_tx; ++tx) m(k, rx, tx) = at(k, rx, tx).value();
    }
  }
  return m;
}

RawCsiRecord make_record(int n_rx, int n_tx) {
  RawCsiRecord r;
  r.n_rx = n_rx;
  r.n_tx = n_tx;
  r.csi.assign(static_cast<std::size_t>(kSubcarriers * n_rx * n_tx), CsiSample{});
  return r;
}

void validate(const RawCsiRecord& r) {
  if (r.n_rx < 1 || r.n_rx > kMaxPorts) {
    fail(ErrorCode::InvariantViolation, "n_rx out of range: " + std::to_string(r.n_rx));
  }
  if (r.n_tx < 1 || r.n_tx > kMaxPorts) {
    fail(ErrorCode::InvariantViolation, "n_tx out of range: " + std::to_string(r.n_tx));
  }
  const auto expected = static_cast<std::size_t>(kSubcarriers * r.n_rx * r.n_tx);
  if (r.csi.size() != expected) {
    fail(ErrorCode::InvariantViolation, "csi has " + std::to_string(r.csi.size()) +
                                            " entries, expected " + std::to_string(expected));
  }
  for (int p = r.n_rx; p < kMaxPorts; ++p) {
    if (r.rssi[p] != 0) {
      fail(ErrorCode::InvariantViolation, "rssi set for absent port " + std::to_string(p));
    }
  }
  std::array<bool, 3> seen{};
  for (int i = 0; i < kMaxPorts; ++i) {
    const int v = r.antenna_perm[i];
    if (v > 3) fail(ErrorCode::BadPermutation, "antenna_perm entry exceeds 2 bits");
    if (i >= r.n_rx) continue;
    if (v >= r.n_rx || seen[v]) {
      fail(ErrorCode::BadPermutation, "antenna_perm is not a permutation of the first n_rx ports");
    }
    seen[v] = true;
  }
}

void CalibrationConstants::validate() const {
  if (!(agc_min < agc_max)) fail(ErrorCode::ConfigError, "agc_min must be below agc_max");
}

std::string PortPair::label() const { return std::to_string(num + 1) + "/" + std::to_string(ref + 1); }

std::vector<PortPair> default_pairs(const std::vector<int>& ports) {
  if (ports.size() < 2) return {};
  if (ports.size() == 2) return {PortPair{ports[1], ports[0]}};
  return {PortPair{ports[1], ports[0]}, PortPair{ports[2], ports[1]}, PortPair{ports[0], ports[2]}};
}

}  // namespace csicalib
