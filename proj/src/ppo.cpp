#include "seatwin/ppo.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace seatwin {

void LrSchedule::validate() const {
  if (breakpoints.empty())
    throw std::invalid_argument("lr_schedule: need at least one breakpoint");
  for (std::size_t i = 1; i < breakpoints.size(); ++i)
    if (!(breakpoints[i].first > breakpoints[i - 1].first))
      throw std::invalid_argument(
          "lr_schedule: breakpoint episodes must be strictly increasing");
  for (const auto& [ep, lr] : breakpoints)
    if (!(lr > 0.0)) throw std::invalid_argument("lr_schedule: lr must be > 0");
}

double LrSchedule::at(double episode) const {
  if (episode <= breakpoints.front().first) return breakpoints.front().second;
  for (std::size_t i = 1; i < breakpoints.size(); ++i) {
    const auto& [e1, v1] = breakpoints[i];
    if (episode == e1) return v1;  // exact at breakpoints
    if (episode < e1) {
      const auto& [e0, v0] = breakpoints[i - 1];
      const double t = (episode - e0) / (e1 - e0);
      return v0 + (v1 - v0) * t;
    }
  }
  return breakpoints.back().second;
}

void PpoConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0))
    throw std::invalid_argument("ppo: gamma must be in (0,1]");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0))
    throw std::invalid_argument("ppo: gae_lambda must be in [0,1]");
  if (!(clip_eps > 0.0)) throw std::invalid_argument("ppo: clip_eps must be > 0");
  if (train_batch_min_steps < 1 || epochs_per_batch < 1 || minibatch_size < 1)
    throw std::invalid_argument("ppo: batch/epoch sizes must be >= 1");
  if (!(value_coeff >= 0.0) || !(entropy_coeff >= 0.0))
    throw std::invalid_argument("ppo: loss coefficients must be >= 0");
  lr_schedule.validate();
}

void compute_gae(std::span<const double> rewards, std::span<const double> values,
                 double bootstrap_value, double gamma, double lambda,
                 std::span<double> advantages, std::span<double> returns) {
  const std::size_t n = rewards.size();
  assert(values.size() == n && advantages.size() == n && returns.size() == n);
  double gae = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double next_value = (i + 1 < n) ? values[i + 1] : bootstrap_value;
    const double delta = rewards[i] + gamma * next_value - values[i];
    gae = delta + gamma * lambda * gae;
    advantages[i] = gae;
    returns[i] = gae + values[i];
  }
}

LossStats ppo_loss(const Policy& policy, const LossBatch& batch,
                   const PpoConfig& cfg, std::span<double> grads) {
  const int n = static_cast<int>(batch.actions.size());
  assert(batch.scaled_obs.size() == static_cast<std::size_t>(n) * kObsDim);
  const bool want_grads = !grads.empty();
  if (want_grads) assert(grads.size() == policy.param_count());

  static thread_local Mlp::Workspace actor_ws;
  static thread_local Mlp::Workspace critic_ws;
  static thread_local std::vector<double> means, vals, d_mean, d_val;
  means.resize(n);
  vals.resize(n);

  policy.actor_means(batch.scaled_obs, n, means, actor_ws);
  policy.critic_values(batch.scaled_obs, n, vals, critic_ws);

  const double log_std = policy.log_std();
  const double std = std::exp(log_std);
  const double inv_var = 1.0 / (std * std);
  const double lo = 1.0 - cfg.clip_eps;
  const double hi = 1.0 + cfg.clip_eps;
  const double inv_n = 1.0 / n;

  LossStats stats;
  double d_log_std = 0.0;
  if (want_grads) {
    d_mean.assign(n, 0.0);
    d_val.assign(n, 0.0);
  }

  for (int i = 0; i < n; ++i) {
    const double z = (batch.actions[i] - means[i]) / std;
    const double lp_new = -0.5 * z * z - log_std -
                          0.5 * std::log(2.0 * std::numbers::pi);
    const double ratio = std::exp(lp_new - batch.logprob_old[i]);
    const double adv = batch.advantages[i];
    const double term1 = ratio * adv;
    const double term2 = std::clamp(ratio, lo, hi) * adv;
    stats.policy_loss -= std::min(term1, term2) * inv_n;
    if (ratio < lo || ratio > hi) stats.clip_fraction += inv_n;

    const double verr = vals[i] - batch.returns[i];
    stats.value_loss += verr * verr * inv_n;

    if (want_grads) {
      // Gradient flows through the surrogate only where the unclipped
      // branch is active (the clipped branch is constant in theta).
      if (term1 <= term2) {
        const double common = -adv * ratio * inv_n;
        d_mean[i] += common * (batch.actions[i] - means[i]) * inv_var;
        d_log_std += common * (z * z - 1.0);
      }
      d_val[i] = cfg.value_coeff * 2.0 * verr * inv_n;
    }
  }

  stats.entropy = gaussian_entropy(log_std);
  stats.total = stats.policy_loss + cfg.value_coeff * stats.value_loss -
                cfg.entropy_coeff * stats.entropy;

  if (want_grads) {
    d_log_std -= cfg.entropy_coeff;
    policy.actor().backward(policy.actor_params(), actor_ws, d_mean, n,
                            policy.actor_grad(grads));
    policy.critic().backward(policy.critic_params(), critic_ws, d_val, n,
                             policy.critic_grad(grads));
    policy.log_std_grad(grads) += d_log_std;
  }
  return stats;
}

double approx_kl(std::span<const double> logprob_old,
                 std::span<const double> logprob_new) {
  assert(logprob_old.size() == logprob_new.size());
  if (logprob_old.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < logprob_old.size(); ++i)
    acc += logprob_old[i] - logprob_new[i];
  return acc / static_cast<double>(logprob_old.size());
}

double clip_grad_norm(std::span<double> grads, double max_norm) {
  double sq = 0.0;
  for (double g : grads) sq += g * g;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (double& g : grads) g *= scale;
  }
  return norm;
}

namespace {

void gather_scaled_obs(const Policy& policy, const RolloutBatch& batch,
                       std::vector<double>& scaled) {
  scaled.resize(batch.steps.size() * kObsDim);
  std::vector<double> raw(batch.steps.size() * kObsDim);
  for (std::size_t i = 0; i < batch.steps.size(); ++i)
    for (int k = 0; k < kObsDim; ++k) raw[i * kObsDim + k] = batch.steps[i].obs[k];
  policy.scale_obs(raw, scaled);
}

}  // namespace

UpdateStats train_update(const RolloutBatch& batch, Policy& policy,
                         AdamState& opt, const PpoConfig& cfg, double lr,
                         Rng& rng) {
  cfg.validate();
  if (batch.policy_version != policy.version())
    throw std::logic_error(
        "ppo: batch was not collected by the current policy (on-policy "
        "violation)");
  const std::size_t n = batch.steps.size();
  if (n == 0) throw std::invalid_argument("ppo: empty batch");

  std::vector<double> scaled_all;
  gather_scaled_obs(policy, batch, scaled_all);

  // Per-episode GAE on the recorded (on-policy) values.
  std::vector<double> advantages(n), returns(n), rewards(n), values(n);
  for (std::size_t i = 0; i < n; ++i) {
    rewards[i] = batch.steps[i].reward;
    values[i] = batch.steps[i].value_old;
  }
  for (const auto& ep : batch.episodes) {
    const std::size_t len = ep.end - ep.begin;
    const double bootstrap =
        (ep.estop_terminated && !cfg.bootstrap_on_estop) ? 0.0
                                                         : ep.bootstrap_value;
    compute_gae({rewards.data() + ep.begin, len}, {values.data() + ep.begin, len},
                bootstrap, cfg.gamma, cfg.gae_lambda,
                {advantages.data() + ep.begin, len},
                {returns.data() + ep.begin, len});
  }

  if (cfg.normalize_advantages) {
    double mean = std::accumulate(advantages.begin(), advantages.end(), 0.0) /
                  static_cast<double>(n);
    double var = 0.0;
    for (double a : advantages) var += (a - mean) * (a - mean);
    var /= static_cast<double>(n);
    const double inv = 1.0 / (std::sqrt(var) + 1e-8);
    for (double& a : advantages) a = (a - mean) * inv;
  }

  std::vector<double> actions(n), logprob_old(n);
  for (std::size_t i = 0; i < n; ++i) {
    actions[i] = batch.steps[i].action;
    logprob_old[i] = batch.steps[i].logprob_old;
  }

  // Snapshot for rollback if the update goes non-finite.
  const std::vector<double> params_backup(policy.params().begin(),
                                          policy.params().end());
  const AdamState opt_backup = opt;

  UpdateStats out;
  out.lr = lr;
  std::vector<double> grads(policy.param_count());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> mb_obs, mb_act, mb_lpo, mb_adv, mb_ret;
  int passes = 0;
  bool aborted = false;

  auto full_batch_kl = [&]() {
    static thread_local Mlp::Workspace ws;
    std::vector<double> means(n);
    policy.actor_means(scaled_all, static_cast<int>(n), means, ws);
    const double std = std::exp(policy.log_std());
    std::vector<double> lp_new(n);
    for (std::size_t i = 0; i < n; ++i)
      lp_new[i] = gaussian_logprob(actions[i], means[i], std);
    return approx_kl(logprob_old, lp_new);
  };

  for (int epoch = 0; epoch < cfg.epochs_per_batch && !aborted; ++epoch) {
    for (std::size_t i = n; i > 1; --i)
      std::swap(order[i - 1], order[rng.next_u64() % i]);
    for (std::size_t start = 0; start < n && !aborted;
         start += static_cast<std::size_t>(cfg.minibatch_size)) {
      const std::size_t stop =
          std::min(n, start + static_cast<std::size_t>(cfg.minibatch_size));
      const std::size_t m = stop - start;
      mb_obs.resize(m * kObsDim);
      mb_act.resize(m);
      mb_lpo.resize(m);
      mb_adv.resize(m);
      mb_ret.resize(m);
      for (std::size_t j = 0; j < m; ++j) {
        const std::size_t src = order[start + j];
        std::copy_n(scaled_all.data() + src * kObsDim, kObsDim,
                    mb_obs.data() + j * kObsDim);
        mb_act[j] = actions[src];
        mb_lpo[j] = logprob_old[src];
        mb_adv[j] = advantages[src];
        mb_ret[j] = returns[src];
      }
      std::fill(grads.begin(), grads.end(), 0.0);
      const LossStats stats = ppo_loss(
          policy, LossBatch{mb_obs, mb_act, mb_lpo, mb_adv, mb_ret}, cfg, grads);
      if (!std::isfinite(stats.total)) {
        aborted = true;
        break;
      }
      clip_grad_norm(grads, cfg.grad_clip_norm);
      if (!adam_step(policy.params(), grads, opt, lr)) {
        aborted = true;
        break;
      }
      policy.clamp_log_std();
      out.policy_loss += stats.policy_loss;
      out.value_loss += stats.value_loss;
      out.entropy += stats.entropy;
      out.clip_fraction += stats.clip_fraction;
      ++passes;
    }
    ++out.epochs_run;
    if (cfg.kl_early_stop > 0.0 && epoch + 1 < cfg.epochs_per_batch &&
        full_batch_kl() > cfg.kl_early_stop)
      break;
  }

  if (aborted) {
    std::copy(params_backup.begin(), params_backup.end(),
              policy.params().begin());
    opt = opt_backup;
    out = UpdateStats{};
    out.lr = lr;
    out.skipped_non_finite = true;
    policy.bump_version();
    return out;
  }

  if (passes > 0) {
    out.policy_loss /= passes;
    out.value_loss /= passes;
    out.entropy /= passes;
    out.clip_fraction /= passes;
  }

  // Post-update divergence diagnostic over the whole batch.
  out.approx_kl = full_batch_kl();

  policy.bump_version();
  return out;
}

DivergenceReport divergence_verdict(std::span<const TrainMetrics> history,
                                    int window_episodes,
                                    double kl_spike_threshold) {
  if (window_episodes < 5)
    throw std::invalid_argument("divergence_verdict: window must be >= 5");
  if (static_cast<int>(history.size()) < window_episodes)
    throw std::invalid_argument(
        "divergence_verdict: history shorter than the window");

  const int w = window_episodes;
  DivergenceReport rep;

  // Least-squares entropy slope over the window.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < w; ++i) {
    sx += i;
    sy += history[i].entropy;
    sxx += static_cast<double>(i) * i;
    sxy += i * history[i].entropy;
  }
  rep.entropy_slope = (w * sxy - sx * sy) / (w * sxx - sx * sx);

  for (int i = 0; i < w; ++i)
    if (history[i].approx_kl > kl_spike_threshold) ++rep.kl_spikes;

  double first5 = 0.0;
  for (int i = 0; i < 5; ++i) first5 += history[i].episode_reward;
  first5 /= 5.0;
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i + 5 <= w; ++i) {
    double m = 0.0;
    for (int j = i; j < i + 5; ++j) m += history[j].episode_reward;
    best = std::max(best, m / 5.0);
  }
  rep.reward_stagnant = best <= first5;

  rep.likely_divergent =
      rep.entropy_slope > 0.0 || rep.kl_spikes >= 3 || rep.reward_stagnant;
  return rep;
}

}  // namespace seatwin
