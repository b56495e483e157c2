#include "seatwin/adam.hpp"

#include <cassert>
#include <cmath>

namespace seatwin {

bool adam_step(std::span<double> params, std::span<const double> grads,
               AdamState& state, double lr, const AdamConfig& cfg) {
  assert(params.size() == grads.size());
  if (state.m.size() != params.size()) state.resize(params.size());

  for (double g : grads) {
    if (!std::isfinite(g)) {
      ++state.skipped_steps;
      return false;
    }
  }

  ++state.step_count;
  state.current_lr = lr;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step_count));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step_count));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
  return true;
}

}  // namespace seatwin
