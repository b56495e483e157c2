#include "seatwin/policy.hpp"

#include <algorithm>
#include <stdexcept>

namespace seatwin {

void PolicyConfig::validate() const {
  if (hidden.empty())
    throw std::invalid_argument("policy: need at least one hidden layer");
  for (int h : hidden)
    if (h <= 0) throw std::invalid_argument("policy: hidden sizes must be > 0");
  for (double s : obs_scale)
    if (!(s > 0.0)) throw std::invalid_argument("policy: obs_scale must be > 0");
  if (!(log_std_min < log_std_max))
    throw std::invalid_argument("policy: log_std bounds inverted");
}

namespace {

std::vector<int> net_sizes(const std::vector<int>& hidden) {
  std::vector<int> sizes;
  sizes.push_back(kObsDim);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(1);
  return sizes;
}

}  // namespace

Policy::Policy(const PolicyConfig& cfg)
    : cfg_(cfg), actor_(net_sizes(cfg.hidden)), critic_(net_sizes(cfg.hidden)) {
  cfg_.validate();
  actor_count_ = actor_.param_count();
  critic_count_ = critic_.param_count();
  params_.assign(actor_count_ + 1 + critic_count_, 0.0);
  params_[actor_count_] = cfg_.log_std_init;
}

void Policy::init(Rng& rng) {
  actor_.init_params({params_.data(), actor_count_}, rng, cfg_.hidden_gain,
                     cfg_.output_gain);
  critic_.init_params({params_.data() + actor_count_ + 1, critic_count_}, rng,
                      cfg_.hidden_gain, 1.0);
  params_[actor_count_] = cfg_.log_std_init;
  ++version_;
}

void Policy::scale_obs(std::span<const double> raw,
                       std::span<double> scaled) const {
  const std::size_t n = raw.size() / kObsDim;
  for (std::size_t i = 0; i < n; ++i)
    for (int k = 0; k < kObsDim; ++k)
      scaled[i * kObsDim + k] = raw[i * kObsDim + k] * cfg_.obs_scale[k];
}

void Policy::actor_forward(const Observation& obs, double* mean,
                           double* std_out) const {
  const auto v = obs.as_vector();
  std::array<double, kObsDim> scaled;
  scale_obs(v, scaled);
  double y = 0.0;
  actor_.forward(actor_params(), scaled, 1, {&y, 1}, scratch_);
  *mean = y;
  *std_out = std::exp(log_std());
}

double Policy::value(const Observation& obs) const {
  const auto v = obs.as_vector();
  std::array<double, kObsDim> scaled;
  scale_obs(v, scaled);
  double y = 0.0;
  critic_.forward(critic_params(), scaled, 1, {&y, 1}, scratch_);
  return y;
}

void Policy::actor_means(std::span<const double> scaled, int batch,
                         std::span<double> means, Mlp::Workspace& ws) const {
  actor_.forward(actor_params(), scaled, batch, means, ws);
}

void Policy::critic_values(std::span<const double> scaled, int batch,
                           std::span<double> values, Mlp::Workspace& ws) const {
  critic_.forward(critic_params(), scaled, batch, values, ws);
}

void Policy::clamp_log_std() {
  params_[actor_count_] =
      std::clamp(params_[actor_count_], cfg_.log_std_min, cfg_.log_std_max);
}

}  // namespace seatwin
