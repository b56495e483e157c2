#include "seatwin/mlp.hpp"

#include <cassert>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace seatwin {

Mlp::Mlp(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2)
    throw std::invalid_argument("mlp: need at least input and output sizes");
  for (int s : sizes_)
    if (s <= 0) throw std::invalid_argument("mlp: layer sizes must be > 0");
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l)
    param_count_ += static_cast<std::size_t>(sizes_[l + 1]) * sizes_[l] +
                    static_cast<std::size_t>(sizes_[l + 1]);
}

void Mlp::forward(std::span<const double> params, std::span<const double> x,
                  int batch, std::span<double> y, Workspace& ws) const {
  assert(params.size() == param_count_);
  assert(x.size() == static_cast<std::size_t>(batch) * sizes_.front());
  assert(y.size() == static_cast<std::size_t>(batch) * sizes_.back());

  const std::size_t layers = sizes_.size() - 1;
  ws.batch = batch;
  ws.acts.resize(layers + 1);
  ws.acts[0].assign(x.begin(), x.end());

  std::size_t off = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    const double* w = params.data() + off;
    const double* b = w + static_cast<std::size_t>(out) * in;
    const bool last = (l + 1 == layers);
    auto& a_in = ws.acts[l];
    auto& a_out = ws.acts[l + 1];
    a_out.resize(static_cast<std::size_t>(batch) * out);
    for (int i = 0; i < batch; ++i) {
      const double* xi = a_in.data() + static_cast<std::size_t>(i) * in;
      double* yi = a_out.data() + static_cast<std::size_t>(i) * out;
      for (int j = 0; j < out; ++j) {
        const double* wj = w + static_cast<std::size_t>(j) * in;
        double acc = b[j];
        for (int k = 0; k < in; ++k) acc += wj[k] * xi[k];
        yi[j] = last ? acc : std::tanh(acc);
      }
    }
    off += static_cast<std::size_t>(out) * in + out;
  }
  std::memcpy(y.data(), ws.acts[layers].data(), y.size() * sizeof(double));
}

void Mlp::backward(std::span<const double> params, Workspace& ws,
                   std::span<const double> dy, int batch,
                   std::span<double> grads) const {
  assert(params.size() == param_count_ && grads.size() == param_count_);
  assert(ws.batch == batch);

  const std::size_t layers = sizes_.size() - 1;
  ws.deltas.resize(layers + 1);
  ws.deltas[layers].assign(dy.begin(), dy.end());

  // Parameter offsets per layer.
  std::vector<std::size_t> offs(layers);
  std::size_t off = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    offs[l] = off;
    off += static_cast<std::size_t>(sizes_[l + 1]) * sizes_[l] + sizes_[l + 1];
  }

  for (std::size_t li = layers; li-- > 0;) {
    const int in = sizes_[li];
    const int out = sizes_[li + 1];
    const double* w = params.data() + offs[li];
    double* gw = grads.data() + offs[li];
    double* gb = gw + static_cast<std::size_t>(out) * in;
    auto& d_out = ws.deltas[li + 1];  // dL/d(pre-activation) of this layer
    auto& a_in = ws.acts[li];

    // Hidden layers stored post-tanh: fold the activation derivative
    // into the incoming delta (output layer is linear, skip).
    if (li + 1 != layers) {
      const auto& a_out = ws.acts[li + 1];
      for (std::size_t i = 0; i < d_out.size(); ++i)
        d_out[i] *= 1.0 - a_out[i] * a_out[i];
    }

    for (int i = 0; i < batch; ++i) {
      const double* di = d_out.data() + static_cast<std::size_t>(i) * out;
      const double* xi = a_in.data() + static_cast<std::size_t>(i) * in;
      for (int j = 0; j < out; ++j) {
        const double d = di[j];
        if (d == 0.0) continue;
        double* gwj = gw + static_cast<std::size_t>(j) * in;
        for (int k = 0; k < in; ++k) gwj[k] += d * xi[k];
        gb[j] += d;
      }
    }

    if (li > 0) {
      auto& d_in = ws.deltas[li];
      d_in.assign(static_cast<std::size_t>(batch) * in, 0.0);
      for (int i = 0; i < batch; ++i) {
        const double* di = d_out.data() + static_cast<std::size_t>(i) * out;
        double* dxi = d_in.data() + static_cast<std::size_t>(i) * in;
        for (int j = 0; j < out; ++j) {
          const double d = di[j];
          if (d == 0.0) continue;
          const double* wj = w + static_cast<std::size_t>(j) * in;
          for (int k = 0; k < in; ++k) dxi[k] += d * wj[k];
        }
      }
    }
  }

  // Activation-derivative folding mutated the tanh deltas in place;
  // callers must not reuse them, but acts stay valid for another
  // backward only after a fresh forward.
  ws.deltas[layers].clear();
}

void Mlp::init_params(std::span<double> params, Rng& rng, double hidden_gain,
                      double output_gain) const {
  assert(params.size() == param_count_);
  const std::size_t layers = sizes_.size() - 1;
  std::size_t off = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    double* w = params.data() + off;
    double* b = w + static_cast<std::size_t>(out) * in;
    const double gain = (l + 1 == layers) ? output_gain : hidden_gain;

    for (std::size_t i = 0; i < static_cast<std::size_t>(out) * in; ++i)
      w[i] = rng.normal();

    // Modified Gram-Schmidt along the shorter dimension, so either the
    // rows or the columns end up orthonormal.
    if (out <= in) {
      for (int j = 0; j < out; ++j) {
        double* rj = w + static_cast<std::size_t>(j) * in;
        for (int p = 0; p < j; ++p) {
          const double* rp = w + static_cast<std::size_t>(p) * in;
          double dot = 0.0;
          for (int k = 0; k < in; ++k) dot += rj[k] * rp[k];
          for (int k = 0; k < in; ++k) rj[k] -= dot * rp[k];
        }
        double norm = 0.0;
        for (int k = 0; k < in; ++k) norm += rj[k] * rj[k];
        norm = std::sqrt(norm);
        if (norm < 1e-12) norm = 1.0;
        for (int k = 0; k < in; ++k) rj[k] /= norm;
      }
    } else {
      for (int j = 0; j < in; ++j) {
        for (int p = 0; p < j; ++p) {
          double dot = 0.0;
          for (int r = 0; r < out; ++r)
            dot += w[static_cast<std::size_t>(r) * in + j] *
                   w[static_cast<std::size_t>(r) * in + p];
          for (int r = 0; r < out; ++r)
            w[static_cast<std::size_t>(r) * in + j] -=
                dot * w[static_cast<std::size_t>(r) * in + p];
        }
        double norm = 0.0;
        for (int r = 0; r < out; ++r) {
          const double v = w[static_cast<std::size_t>(r) * in + j];
          norm += v * v;
        }
        norm = std::sqrt(norm);
        if (norm < 1e-12) norm = 1.0;
        for (int r = 0; r < out; ++r)
          w[static_cast<std::size_t>(r) * in + j] /= norm;
      }
    }
    for (std::size_t i = 0; i < static_cast<std::size_t>(out) * in; ++i)
      w[i] *= gain;
    for (int j = 0; j < out; ++j) b[j] = 0.0;
    off += static_cast<std::size_t>(out) * in + out;
  }
}

}  // namespace seatwin
