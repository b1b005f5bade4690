#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "csicalib/powercalib.hpp"
#include "csicalib/quality.hpp"
#include "csicalib/record.hpp"

namespace csicalib {

/// One propagation path. Its phase at subcarrier k is phase_deg - delay_deg_per_subcarrier * k.
struct Tap {
  double gain = 1.0;
  double phase_deg = 0.0;
  double delay_deg_per_subcarrier = 0.0;
};

/// Per-subcarrier complex noise power at the receiver input that puts the
/// differential phase STD near 3 degrees at 60 dB attenuation.
inline constexpr double kDefaultNoiseFloorDbm = -103.0;

/// Ground-truth description of the cabled chain:
/// transmitter -> divider -> per-port attenuator -> receiver with AGC and ADC.
struct SimConfig {
  double tx_power_dbm = -3.0;  // per-port power after the divider, before attenuators
  std::array<double, 3> attenuation_db{33.0, 30.0, 36.0};
  /// Per-port analog gain mismatch of the receiver chain (seen by RSSI and CSI alike).
  std::array<double, 3> port_gain_offset_db{0.0, 0.0, 0.0};
  std::vector<Tap> multipath{Tap{}};
  /// -infinity disables noise.
  double noise_floor_dbm = kDefaultNoiseFloorDbm;
  double adc_target_dbm = -5.0;
  double adc_ref_amplitude = 30.0;
  int agc_min_db = 26;
  int agc_max_db = 63;
  double c_fixed_db = 44.0;
  int n_packets = 100;
  std::uint64_t seed = 1;

  void validate() const;
  CalibrationConstants constants() const { return {c_fixed_db, agc_min_db, agc_max_db}; }
  double max_attenuation() const;
};

/// Phase offsets of the raw CSI. CFO, SFO and PDD terms are common to all
/// ports; delta_deg is the constant per-port PLL offset.
struct PhaseDistortion {
  double cfo_rate_deg = 47.0;     // per packet
  double sfo_slope_deg = 0.35;    // per subcarrier per packet
  double pdd_jitter_deg = 25.0;   // RMS per packet, phase slope reaching this value at the band edge
  std::array<double, 3> delta_deg{0.0, 57.0, -112.0};
};

struct SimCapture {
  std::vector<RawCsiRecord> records;
  /// CSI in ADC counts before rounding and clipping, one tensor per packet.
  /// With noise disabled this is the quantization-free view of the chain.
  std::vector<CsiMatrix> analog;
  /// Ground-truth per-subcarrier channel power at the receiver input, dBm, [port][k].
  std::array<std::vector<double>, 3> true_power_dbm;
};

/// Deterministic given (config, distortion).
SimCapture simulate_capture(const SimConfig& config, const PhaseDistortion& distortion);

/// AGC readout under the strongest-port rule.
int agc_readout(double strongest_port_dbm, const SimConfig& config);

struct SweepRow {
  SimConfig config;
  VariationStats stats;
  PortLosses est_loss_db{};
  QualityVerdict verdict;
  /// Per-pair ratio check averaged over packets with nonzero CSI on both rows; NaN if none.
  std::vector<RatioCheck> mean_ratio;
  /// Largest |discrepancy| seen on any packet.
  double max_abs_discrepancy_db = 0.0;
  /// Mean calibrated power minus the theoretical tx - attenuation, per port.
  std::array<std::optional<double>, 3> rssi_deviation_db{};
};

/// simulate -> calibrate -> phase -> quality for each configuration.
/// Rows run concurrently; output order follows the input.
std::vector<SweepRow> run_sweep(std::span<const SimConfig> sweep, const PhaseDistortion& distortion,
                                const Thresholds& thresholds = {});

/// Equal-attenuation settings, 16 to 80 dB.
std::vector<SimConfig> group_one_sweep(const SimConfig& base);
/// The seventeen mixed-attenuation settings.
std::vector<SimConfig> group_two_sweep(const SimConfig& base);

}  // namespace csicalib
