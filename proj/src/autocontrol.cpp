#include "csicalib/autocontrol.hpp"

#include <algorithm>
#include <cmath>

#include "csicalib/error.hpp"

namespace csicalib {

namespace {
// Absorbs representation error of integer-valued losses before ceil().
constexpr double kEps = 1e-9;
}  // namespace

bool ControlAction::is_zero() const {
  return std::all_of(added_attenuation_db.begin(), added_attenuation_db.end(), [](double a) { return a == 0.0; });
}

ControlAction recommend(const PortLosses& losses, const ControlThresholds& th) {
  std::vector<double> present;
  for (const auto& l : losses) {
    if (l) present.push_back(*l);
  }
  if (present.size() < 2) fail(ErrorCode::InsufficientPorts, "control needs at least two ports with loss estimates");

  const auto [lo_it, hi_it] = std::minmax_element(present.begin(), present.end());
  const double weakest = *hi_it;
  const double strongest = *lo_it;

  ControlAction action;
  if (weakest > th.max_loss_db) {
    action.feasible = false;
    action.predicted_verdict = Verdict::Unstable;
    return action;
  }
  const double floor = std::min(th.min_loss_db, th.max_loss_db);
  if (weakest - strongest <= th.max_spread_db && strongest >= floor) return action;

  // Every port ends inside [level, level + balance_target]; the weakest
  // cannot be lowered, so the window is anchored on it (or on the floor).
  const double level = std::max(weakest - th.balance_target_db, floor);
  for (int p = 0; p < 3; ++p) {
    if (!losses[p]) continue;
    const double need = level - *losses[p];
    action.added_attenuation_db[p] = need > kEps ? std::ceil(need - kEps) : 0.0;
  }
  return action;
}

std::vector<TrajectoryStep> closed_loop(const SimConfig& initial, const PhaseDistortion& distortion,
                                        const ControlThresholds& control, const Thresholds& quality,
                                        int max_iters) {
  if (max_iters < 1) fail(ErrorCode::ConfigError, "max_iters must be at least 1");
  initial.validate();

  std::vector<TrajectoryStep> trajectory;
  SimConfig cfg = initial;
  ControlThresholds policy = control;
  for (int it = 1; it <= max_iters; ++it) {
    const auto cap = simulate_capture(cfg, distortion);
    const auto consts = cfg.constants();
    const auto stats = variation_stats(cap.records, consts);

    TrajectoryStep step;
    step.iteration = it;
    step.config = cfg;
    step.est_loss_db = estimate_port_loss(cap.records, cfg.tx_power_dbm, consts);
    step.verdict = classify(stats, step.est_loss_db, consts, quality);

    if (step.verdict.cls == Verdict::Reliable) {
      trajectory.push_back(step);
      break;
    }
    if (step.verdict.cls == Verdict::AgcSaturatedLow) {
      double strongest = policy.max_loss_db;
      for (const auto& l : step.est_loss_db) {
        if (l) strongest = std::min(strongest, *l);
      }
      policy.min_loss_db = std::min(std::max(policy.min_loss_db, strongest + policy.agc_floor_step_db),
                                    policy.max_loss_db);
    }
    step.action = recommend(step.est_loss_db, policy);
    trajectory.push_back(step);
    if (!step.action.feasible || step.action.is_zero()) break;

    for (int p = 0; p < 3; ++p) cfg.attenuation_db[p] += step.action.added_attenuation_db[p];
    cfg.seed += 1;
  }
  return trajectory;
}

}  // namespace csicalib
