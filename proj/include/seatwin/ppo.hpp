#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "seatwin/adam.hpp"
#include "seatwin/policy.hpp"
#include "seatwin/rng.hpp"

namespace seatwin {

// Piecewise-linear learning-rate decay indexed by episode, constant
// after the last breakpoint.
struct LrSchedule {
  std::vector<std::pair<double, double>> breakpoints{
      {0.0, 5e-5}, {1280.0, 5e-6}, {2048.0, 1e-7}};

  void validate() const;
  double at(double episode) const;
};

struct PpoConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_eps = 0.2;
  int train_batch_min_steps = 512;  // rounded up to complete episodes
  int epochs_per_batch = 10;
  int minibatch_size = 128;
  double entropy_coeff = 0.0;  // entropy is tracked as a diagnostic
  double value_coeff = 0.5;
  double grad_clip_norm = 0.5;
  LrSchedule lr_schedule;
  bool bootstrap_on_estop = false;  // a halted rig yields no next state
  bool normalize_advantages = true;
  double kl_spike_threshold = 0.02;
  // Stops remaining epochs of an update once the full-batch KL estimate
  // passes this value; 0 disables. Guards against destructive updates
  // after outlier episodes.
  double kl_early_stop = 0.0;

  void validate() const;
};

struct RolloutStep {
  std::array<double, kObsDim> obs{};
  double action = 0.0;
  double logprob_old = 0.0;
  double reward = 0.0;  // reward observed after acting
  double value_old = 0.0;
};

struct EpisodeSegment {
  std::size_t begin = 0;
  std::size_t end = 0;  // one past last
  double bootstrap_value = 0.0;
  bool estop_terminated = false;
  double episode_reward = 0.0;  // env-side episodic total
  double episode_mae = 0.0;
  bool truncated_by_estop() const { return estop_terminated; }
};

struct RolloutBatch {
  std::vector<RolloutStep> steps;
  std::vector<EpisodeSegment> episodes;
  std::uint64_t policy_version = 0;

  void clear() {
    steps.clear();
    episodes.clear();
  }
  bool ready(int min_steps) const {
    return static_cast<int>(steps.size()) >= min_steps;
  }
};

// One row per training episode in the run-level metrics file.
struct TrainMetrics {
  std::int64_t episode = 0;
  double episode_reward = 0.0;
  double episode_mae = 0.0;
  int episode_steps = 0;
  bool estop = false;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double lr = 0.0;
  double clip_fraction = 0.0;
  std::uint64_t actions_dropped = 0;
  std::uint64_t obs_dropped = 0;
  bool update_skipped = false;
};

// delta_t = r_t + gamma*V_{t+1} - V_t accumulated with decay
// gamma*lambda; returns = advantages + values. The bootstrap value
// stands in for V at the step past the end (zero when an e-stop
// terminated the episode).
void compute_gae(std::span<const double> rewards, std::span<const double> values,
                 double bootstrap_value, double gamma, double lambda,
                 std::span<double> advantages, std::span<double> returns);

struct LossStats {
  double total = 0.0;
  double policy_loss = 0.0;  // negative clipped surrogate
  double value_loss = 0.0;   // mean squared error
  double entropy = 0.0;
  double clip_fraction = 0.0;
};

// View of a (mini)batch prepared for the loss: parallel arrays indexed
// together, observations already passed through the policy input scale.
struct LossBatch {
  std::span<const double> scaled_obs;  // n * kObsDim
  std::span<const double> actions;
  std::span<const double> logprob_old;
  std::span<const double> advantages;  // normalized by the caller
  std::span<const double> returns;
};

// Combined PPO loss (-clipped objective + value_coeff * critic MSE -
// entropy_coeff * entropy) and, when `grads` is non-empty, its exact
// gradient accumulated into the flat gradient vector.
LossStats ppo_loss(const Policy& policy, const LossBatch& batch,
                   const PpoConfig& cfg, std::span<double> grads);

// Diagnostic estimator: mean(logprob_old - logprob_new).
double approx_kl(std::span<const double> logprob_old,
                 std::span<const double> logprob_new);

// Scales `grads` so its l2 norm is at most max_norm; returns the
// pre-clip norm.
double clip_grad_norm(std::span<double> grads, double max_norm);

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  double lr = 0.0;
  bool skipped_non_finite = false;
  int epochs_run = 0;
};

// epochs_per_batch shuffled-minibatch passes over the batch. Throws if
// the batch was not collected by this exact parameter version. On a
// non-finite loss or gradient the whole update rolls back to the
// pre-update parameters and `skipped_non_finite` reports it.
UpdateStats train_update(const RolloutBatch& batch, Policy& policy,
                         AdamState& opt, const PpoConfig& cfg,
                         double lr, Rng& rng);

struct DivergenceReport {
  bool likely_divergent = false;
  double entropy_slope = 0.0;
  int kl_spikes = 0;
  bool reward_stagnant = false;
};

// The early-window pruning heuristic: a run is flagged as likely
// divergent when, over the first `window_episodes` episodes, the
// entropy trend slopes upward, the KL estimate spikes past the
// threshold three or more times, or the reward never improves on its
// first five episodes. Throws if the history is shorter than the
// window.
DivergenceReport divergence_verdict(std::span<const TrainMetrics> history,
                                    int window_episodes = 90,
                                    double kl_spike_threshold = 0.02);

}  // namespace seatwin
