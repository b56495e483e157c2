#pragma once

#include <span>
#include <vector>

#include "seatwin/rng.hpp"

namespace seatwin {

// Dense tanh network over externally owned flat parameter storage
// (layer-major: W0 row-major, b0, W1, b1, ...). Hidden layers are tanh,
// output is linear. Forward records post-activations in a reusable
// workspace; backward replays them in reverse and accumulates into a
// flat gradient span of the same layout.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<int> layer_sizes);

  std::size_t param_count() const { return param_count_; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  const std::vector<int>& layer_sizes() const { return sizes_; }

  struct Workspace {
    int batch = 0;
    std::vector<std::vector<double>> acts;    // acts[0]=input, acts[L]=output
    std::vector<std::vector<double>> deltas;  // backward scratch
  };

  // x: batch*input_dim row-major; y: batch*output_dim.
  void forward(std::span<const double> params, std::span<const double> x,
               int batch, std::span<double> y, Workspace& ws) const;

  // dy: batch*output_dim gradient of the loss w.r.t. the output; grads
  // accumulated (+=), so zero them between batches as needed.
  void backward(std::span<const double> params, Workspace& ws,
                std::span<const double> dy, int batch,
                std::span<double> grads) const;

  // Orthogonal-style init: hidden weight matrices get orthonormal
  // columns (or rows, whichever fits) scaled by hidden_gain; the output
  // layer is scaled by output_gain; biases zero.
  void init_params(std::span<double> params, Rng& rng, double hidden_gain,
                   double output_gain) const;

 private:
  std::vector<int> sizes_;
  std::size_t param_count_ = 0;
};

}  // namespace seatwin
