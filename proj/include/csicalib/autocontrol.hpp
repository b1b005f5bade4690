#pragma once

#include <array>
#include <vector>

#include "csicalib/chipsim.hpp"
#include "csicalib/quality.hpp"

namespace csicalib {

/// Balancing policy. The controller acts only when a criterion is violated
/// (spread above max_spread_db, or a port below min_loss_db) and then
/// rebalances to within balance_target_db of the weakest port.
struct ControlThresholds {
  double max_loss_db = 60.0;
  double max_spread_db = 10.0;
  double balance_target_db = 3.0;
  double min_loss_db = 20.0;
  /// How far above the strongest port the loss floor moves when the AGC reads pinned low.
  double agc_floor_step_db = 6.0;
};

struct ControlAction {
  std::array<double, 3> added_attenuation_db{};
  bool feasible = true;
  Verdict predicted_verdict = Verdict::Reliable;

  bool is_zero() const;
};

/// Integer-dB attenuation to add per port. Ports without a loss estimate get 0.
/// Throws InsufficientPorts with fewer than two estimates.
ControlAction recommend(const PortLosses& est_port_loss_db, const ControlThresholds& thresholds = {});

struct TrajectoryStep {
  int iteration = 0;
  SimConfig config;
  PortLosses est_loss_db{};
  QualityVerdict verdict;
  ControlAction action;
};

/// simulate -> calibrate -> estimate loss from RSSI -> recommend -> apply,
/// until Reliable, infeasible, no action possible, or max_iters.
std::vector<TrajectoryStep> closed_loop(const SimConfig& initial, const PhaseDistortion& distortion,
                                        const ControlThresholds& control, const Thresholds& quality,
                                        int max_iters);

}  // namespace csicalib
