#include "csicalib/phase.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "csicalib/error.hpp"

namespace csicalib {

namespace {
constexpr double kRadToDeg = 180.0 / std::numbers::pi;
constexpr double kDegToRad = std::numbers::pi / 180.0;
}  // namespace

double wrap_deg(double deg) {
  double r = std::fmod(deg + 180.0, 360.0);
  if (r <= 0.0) r += 360.0;
  return r - 180.0;
}

double raw_phase(std::complex<double> entry) {
  if (entry == std::complex<double>{}) fail(ErrorCode::ZeroEntry, "phase of a zero CSI entry is undefined");
  return wrap_deg(std::atan2(entry.imag(), entry.real()) * kRadToDeg);
}

PhaseRow differential_phase(const CsiMatrix& csi, PortPair pair, int tx) {
  if (pair.num < 0 || pair.num >= csi.n_rx() || pair.ref < 0 || pair.ref >= csi.n_rx()) {
    fail(ErrorCode::AbsentPort, "pair " + pair.label() + " outside the CSI matrix");
  }
  PhaseRow out(kSubcarriers);
  for (int k = 0; k < kSubcarriers; ++k) {
    const auto a = csi(k, pair.num, tx);
    const auto b = csi(k, pair.ref, tx);
    if (a == std::complex<double>{} || b == std::complex<double>{}) continue;
    out[static_cast<std::size_t>(k)] = wrap_deg(raw_phase(a) - raw_phase(b));
  }
  return out;
}

PhaseRow differential_phase(const RawCsiRecord& record, PortPair pair, int tx) {
  if (!record.port_present(pair.num) || !record.port_present(pair.ref)) {
    fail(ErrorCode::AbsentPort, "pair " + pair.label() + " involves an absent port");
  }
  return differential_phase(record.matrix(), pair, tx);
}

DifferentialPhaseSeries differential_phase_series(std::span<const RawCsiRecord> records, PortPair pair, int tx) {
  DifferentialPhaseSeries s;
  s.pair = pair;
  s.n_packets = records.size();
  s.phase_deg.reserve(records.size() * kSubcarriers);
  for (const auto& r : records) {
    auto row = differential_phase(r, pair, tx);
    s.phase_deg.insert(s.phase_deg.end(), row.begin(), row.end());
  }
  return s;
}

CircularStats circular_stats(std::span<const double> angles_deg) {
  if (angles_deg.size() < 2) {
    fail(ErrorCode::InsufficientData, "circular statistics need at least two angles, got " +
                                          std::to_string(angles_deg.size()));
  }
  double s = 0.0;
  double c = 0.0;
  for (double a : angles_deg) {
    s += std::sin(a * kDegToRad);
    c += std::cos(a * kDegToRad);
  }
  CircularStats out;
  out.mean_deg = wrap_deg(std::atan2(s, c) * kRadToDeg);
  double sq = 0.0;
  for (double a : angles_deg) {
    const double d = wrap_deg(a - out.mean_deg);
    sq += d * d;
  }
  out.std_deg = std::sqrt(sq / static_cast<double>(angles_deg.size()));
  return out;
}

}  // namespace csicalib
