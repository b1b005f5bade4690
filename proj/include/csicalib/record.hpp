#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace csicalib {

/// Subcarrier groups reported per packet.
inline constexpr int kSubcarriers = 30;
inline constexpr int kMaxPorts = 3;

/// One digitized CSI entry (I/Q as signed 8-bit counts).
struct CsiSample {
  std::int8_t re = 0;
  std::int8_t im = 0;

  bool is_zero() const { return re == 0 && im == 0; }
  std::complex<double> value() const { return {static_cast<double>(re), static_cast<double>(im)}; }
  friend bool operator==(const CsiSample&, const CsiSample&) = default;
};

/// Floating-point CSI tensor laid out subcarrier-major, rx, then tx innermost.
class CsiMatrix {
 public:
  CsiMatrix() = default;
  CsiMatrix(int n_rx, int n_tx);

  int n_rx() const { return n_rx_; }
  int n_tx() const { return n_tx_; }

  std::complex<double>& operator()(int k, int rx, int tx) { return data_[index(k, rx, tx)]; }
  const std::complex<double>& operator()(int k, int rx, int tx) const { return data_[index(k, rx, tx)]; }

  /// Sum of squared moduli over all subcarriers and tx streams of one rx row.
  double row_power(int rx) const;
  /// All entries of one rx row (K * n_tx values, subcarrier-major).
  std::vector<std::complex<double>> row(int rx) const;

 private:
  std::size_t index(int k, int rx, int tx) const {
    return static_cast<std::size_t>((k * n_rx_ + rx) * n_tx_ + tx);
  }

  int n_rx_ = 0;
  int n_tx_ = 0;
  std::vector<std::complex<double>> data_;
};

/// One received packet as reported by the NIC.
struct RawCsiRecord {
  std::uint32_t timestamp_low = 0;
  std::uint16_t bfee_count = 0;
  int n_rx = 1;
  int n_tx = 1;
  std::array<std::uint8_t, 3> rssi{};  // 0 marks an absent port
  std::int8_t noise = 0;
  std::uint8_t agc = 0;
  std::array<std::uint8_t, 3> antenna_perm{0, 1, 2};
  std::uint16_t rate_flags = 0;
  std::vector<CsiSample> csi;  // K * n_rx * n_tx

  CsiSample& at(int k, int rx, int tx) { return csi[index(k, rx, tx)]; }
  const CsiSample& at(int k, int rx, int tx) const { return csi[index(k, rx, tx)]; }

  bool port_present(int port) const { return port >= 0 && port < n_rx && rssi[port] != 0; }
  std::vector<int> present_ports() const;

  CsiMatrix matrix() const;

  friend bool operator==(const RawCsiRecord&, const RawCsiRecord&) = default;

 private:
  std::size_t index(int k, int rx, int tx) const {
    return static_cast<std::size_t>((k * n_rx + rx) * n_tx + tx);
  }
};

/// Allocates a zero CSI block of the right size.
RawCsiRecord make_record(int n_rx, int n_tx);

/// Throws InvariantViolation / BadPermutation when the record breaks a type invariant.
void validate(const RawCsiRecord& record);

/// Chip constants used to remove amplification from nominal RSSI.
struct CalibrationConstants {
  double c_fixed = 44.0;
  int agc_min = 26;
  int agc_max = 63;

  void validate() const;
};

/// Ordered receive-port pair, 0-based; labelled "num/ref" 1-based.
struct PortPair {
  int num = 1;
  int ref = 0;

  std::string label() const;
  friend bool operator==(const PortPair&, const PortPair&) = default;
};

/// The (2/1, 3/2, 1/3) cycle restricted to the present ports.
std::vector<PortPair> default_pairs(const std::vector<int>& present_ports);

}  // namespace csicalib
