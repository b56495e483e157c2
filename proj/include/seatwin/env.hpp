#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "seatwin/safety.hpp"
#include "seatwin/trajectory.hpp"
#include "seatwin/transport.hpp"

namespace seatwin {

// The 5-vector the agent sees: measured angle (clamped to +-0.25 rad),
// forward-Euler derivatives of the unclamped measured angle, measured
// force, and the desired force at the current time.
struct Observation {
  double q = 0.0;       // rad, clamped
  double q_dot = 0.0;   // rad/s
  double q_ddot = 0.0;  // rad/s^2
  double f = 0.0;       // N
  double f_des = 0.0;   // N

  std::array<double, 5> as_vector() const { return {q, q_dot, q_ddot, f, f_des}; }
};

inline constexpr double kObsAngleClampRad = 0.25;
inline constexpr int kObsDim = 5;

struct Action {
  double current_a = 0.0;
};

struct EpisodeConfig {
  double duration_s = 60.0;
  double reward_divisor = 1.0e6;
  double reset_jitter_rad = 0.0;

  int steps(double policy_rate_hz) const;
};

// r = -(F_des - F)^2 / D
inline double reward(double f_des, double f, double divisor) {
  const double e = f_des - f;
  return -(e * e) / divisor;
}

// Derivative chain is seeded with zero velocity/acceleration at step 0;
// afterwards q_dot and q_ddot are exact difference quotients of the
// measured-angle sequence. The angle clamp applies after the
// derivatives are formed.
Observation build_observation(double q_meas_now, double q_meas_prev,
                              double q_dot_prev, double f_meas, double f_des,
                              double dt);

struct StepRecord {
  double t = 0.0;
  double f_des = 0.0;
  double f = 0.0;        // measured force, as observed
  double q_true = 0.0;
  double q_meas = 0.0;
  double q_dot = 0.0;
  double q_ddot = 0.0;
  double action_proposed_a = 0.0;
  double action_applied_a = 0.0;  // at the last low-level tick of the step
  double reward = 0.0;            // -(f_des - f)^2 / D of this row
  SafetyMode safety_mode = SafetyMode::kNominal;  // at end of the step
};

struct EpisodeLog {
  std::vector<StepRecord> steps;
  double total_reward = 0.0;
  double mae_n = 0.0;
  double peak_abs_force_n = 0.0;
  bool estop_truncated = false;
  std::optional<FaultRecord> fault;
  std::uint64_t actions_dropped = 0;
  std::uint64_t obs_dropped = 0;
  // Reward of the terminal sensor read; pairs with the last action for
  // learning but is not part of total_reward (which sums the rows).
  double terminal_reward = 0.0;
  Observation terminal_obs;
};

// Any action source the environment can poll: the environment drives the
// policy, not the other way around.
class ActionSource {
 public:
  virtual ~ActionSource() = default;
  virtual Action act(const Observation& obs) = 0;
  // Called once per episode with the final observation (for
  // bootstrapping); default ignores it.
  virtual void episode_end(const Observation& /*terminal_obs*/,
                           bool /*estopped*/) {}
};

// Polls `policy` at the policy rate against the plant/safety/transport
// stack until the episode duration elapses or an e-stop latches.
// StackT needs poll()/push_action()/run_policy_interval()/estopped()
// plus the accessors SimStack provides; tests substitute doubles.
template <typename StackT>
EpisodeLog run_episode(ActionSource& policy, const TrajectorySpec& spec,
                       StackT& stack, const EpisodeConfig& cfg);

extern template EpisodeLog run_episode<SimStack>(ActionSource&,
                                                 const TrajectorySpec&,
                                                 SimStack&,
                                                 const EpisodeConfig&);

}  // namespace seatwin

#include "seatwin/env_impl.hpp"
