#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "coopdrive/neural/mlp.hpp"

namespace coopdrive::marl {

using neural::Matrix;
using neural::Mlp;

/// State-conditioned monotonic mixer. Each hypernetwork maps the joint state
/// through one hidden layer; the two weight heads pass through |.| so every
/// mixing weight is nonnegative.
///
///   hidden = elu(q W1(s) + b1(s)),  Q_tot = hidden . w2(s) + b2(s)
struct MixerParams {
  std::size_t agents = 0;
  std::size_t embed = 0;
  Mlp hyper_w1;  // state -> agents * embed (row-major agents x embed)
  Mlp hyper_b1;  // state -> embed
  Mlp hyper_w2;  // state -> embed
  Mlp hyper_b2;  // state -> 1

  MixerParams() = default;
  MixerParams(std::size_t agents, std::size_t state_dim, std::size_t embed, std::size_t hidden, Rng& rng);

  std::size_t state_dim() const { return hyper_w1.input_dim(); }
  MixerParams zeros_like() const;
  void append_views(neural::TensorViews& out);
  void append_views(neural::ConstTensorViews& out) const;

  friend bool operator==(const MixerParams&, const MixerParams&) = default;
};

struct MixingWeights {
  Matrix w1;  // agents x embed, all >= 0
  std::vector<double> b1;
  std::vector<double> w2;  // embed, all >= 0
  double b2 = 0.0;
};

MixingWeights mixing_weights(const MixerParams& m, std::span<const double> state);

/// Single-sample mixer output. Throws neural::DimensionError on arity or
/// state-size mismatch.
double qmix_total(std::span<const double> q_values, std::span<const double> state, const MixerParams& m);

struct MixerCache {
  neural::MlpCache w1, b1, w2, b2;
  Matrix q;       // batch x agents
  Matrix pre;     // batch x embed, before elu
  Matrix hidden;  // batch x embed
  std::vector<double> output;
};

/// Batched mixer; rows of `q` (batch x agents) and `states` pair up.
std::vector<double> qmix_forward_batch(const MixerParams& m, const Matrix& q, const Matrix& states,
                                       MixerCache& cache);

/// Accumulates parameter gradients into `grads` and writes dL/dq into `q_grad`.
void qmix_backward_batch(const MixerParams& m, const MixerCache& cache, std::span<const double> upstream,
                         MixerParams& grads, Matrix& q_grad);

void soft_update(const MixerParams& src, MixerParams& dst, double tau);

}  // namespace coopdrive::marl
