#pragma once

#include <array>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "seatwin/env.hpp"
#include "seatwin/mlp.hpp"
#include "seatwin/rng.hpp"

namespace seatwin {

struct PolicyConfig {
  std::vector<int> hidden{256, 256};
  // Fixed per-feature input scaling baked into the function approximator
  // so raw SI observations land in tanh's useful range. Not part of the
  // MDP; the environment delivers unscaled observations.
  std::array<double, kObsDim> obs_scale{4.0, 20.0, 0.3, 0.005, 0.02};
  double log_std_init = -0.5;
  double log_std_min = -20.0;
  double log_std_max = 2.0;
  double hidden_gain = 1.0;
  double output_gain = 0.01;

  void validate() const;
};

// Actor (Gaussian mean head + state-independent log std) and critic over
// one flat parameter vector, laid out [actor | log_std | critic] so the
// optimizer and checkpointing see a single array.
class Policy {
 public:
  explicit Policy(const PolicyConfig& cfg);

  void init(Rng& rng);

  std::size_t param_count() const { return params_.size(); }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  std::span<const double> actor_params() const {
    return {params_.data(), actor_count_};
  }
  std::span<const double> critic_params() const {
    return {params_.data() + actor_count_ + 1, critic_count_};
  }
  double log_std() const { return params_[actor_count_]; }
  std::size_t log_std_index() const { return actor_count_; }

  // Gradient-segment views over an external flat gradient vector of
  // param_count() entries.
  std::span<double> actor_grad(std::span<double> g) const {
    return g.subspan(0, actor_count_);
  }
  std::span<double> critic_grad(std::span<double> g) const {
    return g.subspan(actor_count_ + 1, critic_count_);
  }
  double& log_std_grad(std::span<double> g) const { return g[actor_count_]; }

  const Mlp& actor() const { return actor_; }
  const Mlp& critic() const { return critic_; }
  const PolicyConfig& config() const { return cfg_; }

  void scale_obs(std::span<const double> raw, std::span<double> scaled) const;

  // mean/std of the action distribution for one observation.
  void actor_forward(const Observation& obs, double* mean, double* std) const;
  double value(const Observation& obs) const;

  // Batched forwards over pre-scaled inputs (batch*kObsDim).
  void actor_means(std::span<const double> scaled, int batch,
                   std::span<double> means, Mlp::Workspace& ws) const;
  void critic_values(std::span<const double> scaled, int batch,
                     std::span<double> values, Mlp::Workspace& ws) const;

  void clamp_log_std();

  // Bumped on every parameter update; rollouts are tagged with it so the
  // trainer can enforce on-policy batches.
  std::uint64_t version() const { return version_; }
  void bump_version() { ++version_; }

 private:
  PolicyConfig cfg_;
  Mlp actor_;
  Mlp critic_;
  std::vector<double> params_;
  std::size_t actor_count_ = 0;
  std::size_t critic_count_ = 0;
  std::uint64_t version_ = 0;
  mutable Mlp::Workspace scratch_;
};

inline double gaussian_logprob(double a, double mean, double std) {
  const double z = (a - mean) / std;
  return -0.5 * z * z - std::log(std) -
         0.5 * std::log(2.0 * std::numbers::pi);
}

inline double gaussian_entropy(double log_std) {
  return 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e) + log_std;
}

struct SampledAction {
  double a = 0.0;
  double logprob = 0.0;
};

inline SampledAction sample_action(double mean, double std, Rng& rng) {
  const double a = mean + std * rng.normal();
  return {a, gaussian_logprob(a, mean, std)};
}

}  // namespace seatwin
