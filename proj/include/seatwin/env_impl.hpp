#pragma once

#include <cmath>
#include <stdexcept>

namespace seatwin {

inline int EpisodeConfig::steps(double policy_rate_hz) const {
  const double n = duration_s * policy_rate_hz;
  if (std::abs(n - std::round(n)) > 1e-9 || n < 1.0)
    throw std::invalid_argument("env: duration * policy_rate must be integral");
  return static_cast<int>(std::round(n));
}

template <typename StackT>
EpisodeLog run_episode(ActionSource& policy, const TrajectorySpec& spec,
                       StackT& stack, const EpisodeConfig& cfg) {
  spec.validate();
  const double dt = stack.transport_config().policy_dt();
  const int total_steps = cfg.steps(stack.transport_config().policy_rate_hz);

  stack.reset_episode(cfg.reset_jitter_rad);
  const std::uint64_t a_drop0 = stack.link().actions_dropped;
  const std::uint64_t o_drop0 = stack.link().obs_dropped;

  EpisodeLog log;
  log.steps.reserve(static_cast<std::size_t>(total_steps));

  double q_prev = 0.0;
  double q_dot_prev = 0.0;
  bool first = true;
  double abs_err_sum = 0.0;

  auto observe = [&](double t) {
    const RawSensors s = stack.poll();
    const double f_des = desired_force(spec, t);
    if (first) {
      q_prev = s.q_meas;
      q_dot_prev = 0.0;
      first = false;
    }
    Observation obs =
        build_observation(s.q_meas, q_prev, q_dot_prev, s.f_meas, f_des, dt);
    q_prev = s.q_meas;
    q_dot_prev = obs.q_dot;
    return std::pair<Observation, RawSensors>{obs, s};
  };

  int t = 0;
  for (; t < total_steps; ++t) {
    const auto [obs, sensors] = observe(t * dt);
    const Action action = policy.act(obs);

    StepRecord rec;
    rec.t = t * dt;
    rec.f_des = obs.f_des;
    rec.f = sensors.f_meas;
    rec.q_true = stack.plant_state().q;
    rec.q_meas = sensors.q_meas;
    rec.q_dot = obs.q_dot;
    rec.q_ddot = obs.q_ddot;
    rec.action_proposed_a = action.current_a;
    rec.reward = reward(obs.f_des, sensors.f_meas, cfg.reward_divisor);

    stack.push_action(action.current_a);
    stack.run_policy_interval();

    rec.action_applied_a = stack.last_applied_a();
    rec.safety_mode = stack.safety_state().mode;
    log.steps.push_back(rec);

    log.total_reward += rec.reward;
    abs_err_sum += std::abs(rec.f_des - rec.f);
    log.peak_abs_force_n = std::max(log.peak_abs_force_n, std::abs(rec.f));

    if (stack.estopped()) {
      log.estop_truncated = true;
      ++t;
      break;
    }
  }

  // Terminal read: reward for the last action and the bootstrap
  // observation. Not added to total_reward, which sums the logged rows.
  const auto [terminal_obs, terminal_sensors] = observe(t * dt);
  log.terminal_obs = terminal_obs;
  log.terminal_reward =
      reward(terminal_obs.f_des, terminal_sensors.f_meas, cfg.reward_divisor);

  log.fault = stack.safety_state().latched_fault;
  log.mae_n = log.steps.empty() ? 0.0 : abs_err_sum / log.steps.size();
  log.actions_dropped = stack.link().actions_dropped - a_drop0;
  log.obs_dropped = stack.link().obs_dropped - o_drop0;
  policy.episode_end(terminal_obs, log.estop_truncated);
  return log;
}

}  // namespace seatwin
