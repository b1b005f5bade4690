#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "csicalib/error.hpp"
#include "csicalib/record.hpp"

namespace testsupport {

using namespace csicalib;

#define CHECK_ERROR_CODE(expr, expected_code)                      \
  do {                                                             \
    bool thrown_ = false;                                          \
    try {                                                          \
      (void)(expr);                                                \
    } catch (const ::csicalib::Error& e_) {                        \
      thrown_ = true;                                              \
      CHECK(e_.code() == (expected_code));                         \
    }                                                              \
    CHECK_MESSAGE(thrown_, "expected " #expected_code " from " #expr); \
  } while (0)

inline RawCsiRecord random_record(std::mt19937_64& rng, bool allow_absent = true) {
  std::uniform_int_distribution<int> dim(1, 3);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<int> comp(-128, 127);
  RawCsiRecord r = make_record(dim(rng), dim(rng));
  r.timestamp_low = static_cast<std::uint32_t>(rng());
  r.bfee_count = static_cast<std::uint16_t>(rng());
  for (int p = 0; p < r.n_rx; ++p) {
    r.rssi[p] = static_cast<std::uint8_t>(allow_absent ? byte(rng) : std::uniform_int_distribution<int>(1, 255)(rng));
  }
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

/// Brute-force sum of re^2 + im^2 straight from the sample list.
inline double brute_row_power(const RawCsiRecord& r, int rx) {
  double s = 0.0;
  for (int k = 0; k < kSubcarriers; ++k) {
    for (int tx = 0; tx < r.n_tx; ++tx) {
      const auto& c = r.csi[static_cast<std::size_t>((k * r.n_rx + rx) * r.n_tx + tx)];
      s += double(c.re) * c.re + double(c.im) * c.im;
    }
  }
  return s;
}

}  // namespace testsupport
