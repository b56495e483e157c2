#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace seatwin {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<double> m;  // first-moment accumulator
  std::vector<double> v;  // second-moment accumulator
  std::int64_t step_count = 0;
  double current_lr = 0.0;
  std::uint64_t skipped_steps = 0;  // non-finite-gradient skips

  void resize(std::size_t n) {
    m.assign(n, 0.0);
    v.assign(n, 0.0);
  }
};

// Bias-corrected adaptive-moment update in place. Returns false and
// leaves params/moments untouched if any gradient entry is non-finite.
bool adam_step(std::span<double> params, std::span<const double> grads,
               AdamState& state, double lr, const AdamConfig& cfg = {});

}  // namespace seatwin
