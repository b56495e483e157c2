#include "seatwin/safety.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace seatwin {

void SafetyConfig::validate() const {
  if (!(learn_bound_rad > 0.0 && learn_bound_rad < estop_bound_rad))
    throw std::invalid_argument(
        "safety: need 0 < learn_bound_rad < estop_bound_rad");
  if (!(estop_force_n > 0.0))
    throw std::invalid_argument("safety: estop_force_n must be > 0");
  if (!(action_sat_a > 0.0 && action_sat_a <= supply_clamp_a))
    throw std::invalid_argument(
        "safety: need 0 < action_sat_a <= supply_clamp_a");
  if (!(restoring_current_a > 0.0 && restoring_current_a <= supply_clamp_a))
    throw std::invalid_argument(
        "safety: need 0 < restoring_current_a <= supply_clamp_a");
  if (!(recovery_hysteresis_rad >= 0.0 &&
        recovery_hysteresis_rad < learn_bound_rad))
    throw std::invalid_argument(
        "safety: recovery_hysteresis_rad must be in [0, learn_bound_rad)");
}

SuperviseResult supervise(double q_meas, double f_meas, double proposed_a,
                          const SafetyState& s, const SafetyConfig& cfg,
                          double time_s) {
  SuperviseResult out;
  out.state = s;

  if (s.mode == SafetyMode::kEstopped) {
    out.applied_a = 0.0;
    return out;
  }

  auto latch = [&](FaultKind kind) {
    out.state.mode = SafetyMode::kEstopped;
    out.state.latched_fault = FaultRecord{kind, time_s, q_meas, f_meas};
    out.applied_a = 0.0;
  };

  if (!std::isfinite(q_meas) || !std::isfinite(f_meas) ||
      !std::isfinite(proposed_a)) {
    latch(FaultKind::kNonFinite);
    return out;
  }
  if (std::abs(q_meas) > cfg.estop_bound_rad) {
    latch(FaultKind::kPositionLimit);
    return out;
  }
  if (std::abs(f_meas) > cfg.estop_force_n) {
    latch(FaultKind::kForceLimit);
    return out;
  }

  // Mode transitions, re-evaluated every call. Exiting recovery requires
  // re-entering past the hysteresis margin to avoid chattering.
  if (s.mode == SafetyMode::kBoundaryRecovery) {
    if (std::abs(q_meas) <= cfg.learn_bound_rad - cfg.recovery_hysteresis_rad)
      out.state.mode = SafetyMode::kNominal;
  } else if (std::abs(q_meas) > cfg.learn_bound_rad) {
    out.state.mode = SafetyMode::kBoundaryRecovery;
  }

  if (out.state.mode == SafetyMode::kBoundaryRecovery) {
    const double toward_center = q_meas > 0.0 ? -1.0 : 1.0;
    out.applied_a = std::clamp(toward_center * cfg.restoring_current_a,
                               -cfg.supply_clamp_a, cfg.supply_clamp_a);
  } else {
    const double sat = std::clamp(proposed_a, -cfg.action_sat_a, cfg.action_sat_a);
    out.applied_a = std::clamp(sat, -cfg.supply_clamp_a, cfg.supply_clamp_a);
  }
  return out;
}

SafetyState remote_shutoff(const SafetyState& s, double time_s) {
  SafetyState out = s;
  out.mode = SafetyMode::kEstopped;
  if (!out.latched_fault)
    out.latched_fault = FaultRecord{FaultKind::kRemote, time_s, 0.0, 0.0};
  return out;
}

SafetyState manual_reset(const SafetyState& s, bool* warned) {
  if (warned != nullptr) *warned = false;
  if (s.mode != SafetyMode::kEstopped) {
    if (warned != nullptr) *warned = true;
    return s;
  }
  return SafetyState{};
}

const char* to_string(SafetyMode mode) {
  switch (mode) {
    case SafetyMode::kNominal: return "NOMINAL";
    case SafetyMode::kBoundaryRecovery: return "BOUNDARY_RECOVERY";
    case SafetyMode::kEstopped: return "ESTOPPED";
  }
  return "?";
}

const char* to_string(FaultKind kind) {
  switch (kind) {
    case FaultKind::kPositionLimit: return "position_limit";
    case FaultKind::kForceLimit: return "force_limit";
    case FaultKind::kNonFinite: return "non_finite";
    case FaultKind::kRemote: return "remote";
  }
  return "?";
}

}  // namespace seatwin
