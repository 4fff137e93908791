#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "coopdrive/neural/mlp.hpp"

namespace coopdrive::marl {

using neural::Matrix;
using neural::Mlp;

/// Attention critic for N robots. W_q, W_k and V are shared; encoders and
/// heads are per robot.
///
///   e_i = enc_i(o_i),  g_j = sa_enc_j(o_j, onehot(a_j))
///   alpha_j ~ exp(e_j^T W_k^T W_q e_i)   over j != i
///   x_i = sum_j alpha_j h(V g_j),  h = leaky relu
///   Q_i(., own action) = head_i([e_i, x_i])
struct AttentionParams {
  Matrix w_q;  // key_dim x embed
  Matrix w_k;  // key_dim x embed
  Matrix v;    // embed x embed
  std::vector<Mlp> encoders;
  std::vector<Mlp> sa_encoders;
  std::vector<Mlp> heads;
  double leak = 0.01;

  AttentionParams() = default;
  AttentionParams(std::size_t robots, std::size_t obs_dim, std::size_t actions, std::size_t embed,
                  std::size_t hidden, Rng& rng);

  std::size_t robots() const { return encoders.size(); }
  std::size_t embed() const { return v.rows(); }
  std::size_t actions() const { return heads.empty() ? 0 : heads.front().output_dim(); }

  AttentionParams zeros_like() const;
  void append_views(neural::TensorViews& out);
  void append_views(neural::ConstTensorViews& out) const;

  friend bool operator==(const AttentionParams&, const AttentionParams&) = default;
};

struct AttentionOutput {
  std::vector<double> x;
  std::vector<double> alpha;  // over `others`
  std::vector<std::size_t> others;  // j != i in index order
};

/// Attention read-out for robot i given precomputed embeddings e and
/// state-action encodings g (one per robot). Throws std::invalid_argument for
/// fewer than two robots.
AttentionOutput maac_attention(std::span<const std::vector<double>> e, std::span<const std::vector<double>> g,
                               const AttentionParams& p, std::size_t i);

struct AttentionCache {
  std::vector<neural::MlpCache> enc, sa_enc, head;
  std::vector<Matrix> e, g, query, key, value_pre, value;
  std::vector<Matrix> alpha;  // per i: batch x (robots - 1)
  std::vector<Matrix> q;      // per i: batch x actions
};

/// Batched critic. `obs[k]` is batch x obs_dim, `actions[k]` batch x actions
/// (one-hot). Returns per-robot Q over own actions.
const std::vector<Matrix>& attention_critic_forward(const AttentionParams& p, const std::vector<Matrix>& obs,
                                                    const std::vector<Matrix>& actions, AttentionCache& cache);

/// Accumulates parameter gradients for upstream dL/dQ_i (batch x actions).
void attention_critic_backward(const AttentionParams& p, const AttentionCache& cache,
                               const std::vector<Matrix>& q_grad, AttentionParams& grads);

void soft_update(const AttentionParams& src, AttentionParams& dst, double tau);

}  // namespace coopdrive::marl
