#include "coopdrive/marl/qmix.hpp"

#include <cmath>
#include <string>

namespace coopdrive::marl {

using neural::DimensionError;
using neural::OutputActivation;

namespace {

double elu(double x) { return x > 0.0 ? x : std::expm1(x); }
double elu_grad(double x) { return x > 0.0 ? 1.0 : std::exp(x); }
double sign(double x) { return static_cast<double>((x > 0.0) - (x < 0.0)); }

}  // namespace

MixerParams::MixerParams(std::size_t agents_, std::size_t state_dim, std::size_t embed_, std::size_t hidden,
                         Rng& rng)
    : agents(agents_),
      embed(embed_),
      hyper_w1({state_dim, hidden, agents_ * embed_}, OutputActivation::kLinear, rng),
      hyper_b1({state_dim, hidden, embed_}, OutputActivation::kLinear, rng),
      hyper_w2({state_dim, hidden, embed_}, OutputActivation::kLinear, rng),
      hyper_b2({state_dim, hidden, 1}, OutputActivation::kLinear, rng) {}

MixerParams MixerParams::zeros_like() const {
  MixerParams z;
  z.agents = agents;
  z.embed = embed;
  z.hyper_w1 = hyper_w1.zeros_like();
  z.hyper_b1 = hyper_b1.zeros_like();
  z.hyper_w2 = hyper_w2.zeros_like();
  z.hyper_b2 = hyper_b2.zeros_like();
  return z;
}

void MixerParams::append_views(neural::TensorViews& out) {
  hyper_w1.append_views(out);
  hyper_b1.append_views(out);
  hyper_w2.append_views(out);
  hyper_b2.append_views(out);
}

void MixerParams::append_views(neural::ConstTensorViews& out) const {
  hyper_w1.append_views(out);
  hyper_b1.append_views(out);
  hyper_w2.append_views(out);
  hyper_b2.append_views(out);
}

MixingWeights mixing_weights(const MixerParams& m, std::span<const double> state) {
  if (state.size() != m.state_dim()) throw DimensionError("mixer state size mismatch");
  MixingWeights w;
  const auto raw_w1 = neural::mlp_forward(m.hyper_w1, state);
  w.w1 = Matrix(m.agents, m.embed);
  for (std::size_t k = 0; k < raw_w1.size(); ++k) w.w1.values()[k] = std::abs(raw_w1[k]);
  w.b1 = neural::mlp_forward(m.hyper_b1, state);
  w.w2 = neural::mlp_forward(m.hyper_w2, state);
  for (double& x : w.w2) x = std::abs(x);
  w.b2 = neural::mlp_forward(m.hyper_b2, state)[0];
  return w;
}

double qmix_total(std::span<const double> q_values, std::span<const double> state, const MixerParams& m) {
  if (q_values.size() != m.agents) {
    throw DimensionError("mixer expects " + std::to_string(m.agents) + " Q values, got " +
                         std::to_string(q_values.size()));
  }
  const auto w = mixing_weights(m, state);
  double total = w.b2;
  for (std::size_t e = 0; e < m.embed; ++e) {
    double pre = w.b1[e];
    for (std::size_t i = 0; i < m.agents; ++i) pre += q_values[i] * w.w1(i, e);
    total += elu(pre) * w.w2[e];
  }
  return total;
}

std::vector<double> qmix_forward_batch(const MixerParams& m, const Matrix& q, const Matrix& states,
                                       MixerCache& cache) {
  if (q.cols() != m.agents || q.rows() != states.rows()) throw DimensionError("mixer batch shape mismatch");
  if (states.cols() != m.state_dim()) throw DimensionError("mixer state size mismatch");
  neural::forward_batch(m.hyper_w1, states, cache.w1);
  neural::forward_batch(m.hyper_b1, states, cache.b1);
  neural::forward_batch(m.hyper_w2, states, cache.w2);
  neural::forward_batch(m.hyper_b2, states, cache.b2);
  const std::size_t batch = q.rows();
  cache.q = q;
  cache.pre = Matrix(batch, m.embed);
  cache.hidden = Matrix(batch, m.embed);
  cache.output.assign(batch, 0.0);
  for (std::size_t b = 0; b < batch; ++b) {
    const double* w1 = cache.w1.output.row_span(b).data();
    const double* b1 = cache.b1.output.row_span(b).data();
    const double* w2 = cache.w2.output.row_span(b).data();
    double total = cache.b2.output(b, 0);
    for (std::size_t e = 0; e < m.embed; ++e) {
      double pre = b1[e];
      for (std::size_t i = 0; i < m.agents; ++i) pre += q(b, i) * std::abs(w1[i * m.embed + e]);
      cache.pre(b, e) = pre;
      cache.hidden(b, e) = elu(pre);
      total += cache.hidden(b, e) * std::abs(w2[e]);
    }
    cache.output[b] = total;
  }
  return cache.output;
}

void qmix_backward_batch(const MixerParams& m, const MixerCache& cache, std::span<const double> upstream,
                         MixerParams& grads, Matrix& q_grad) {
  const std::size_t batch = cache.q.rows();
  if (upstream.size() != batch) throw DimensionError("mixer upstream size mismatch");
  Matrix d_w1(batch, m.agents * m.embed), d_b1(batch, m.embed), d_w2(batch, m.embed), d_b2(batch, 1);
  q_grad = Matrix(batch, m.agents);
  for (std::size_t b = 0; b < batch; ++b) {
    const double g = upstream[b];
    if (g == 0.0) continue;
    const double* w1 = cache.w1.output.row_span(b).data();
    const double* w2 = cache.w2.output.row_span(b).data();
    d_b2(b, 0) = g;
    for (std::size_t e = 0; e < m.embed; ++e) {
      d_w2(b, e) = g * cache.hidden(b, e) * sign(w2[e]);
      const double d_pre = g * std::abs(w2[e]) * elu_grad(cache.pre(b, e));
      d_b1(b, e) = d_pre;
      for (std::size_t i = 0; i < m.agents; ++i) {
        const double raw = w1[i * m.embed + e];
        d_w1(b, i * m.embed + e) = d_pre * cache.q(b, i) * sign(raw);
        q_grad(b, i) += d_pre * std::abs(raw);
      }
    }
  }
  neural::backward_batch(m.hyper_w1, cache.w1, d_w1, grads.hyper_w1);
  neural::backward_batch(m.hyper_b1, cache.b1, d_b1, grads.hyper_b1);
  neural::backward_batch(m.hyper_w2, cache.w2, d_w2, grads.hyper_w2);
  neural::backward_batch(m.hyper_b2, cache.b2, d_b2, grads.hyper_b2);
}

void soft_update(const MixerParams& src, MixerParams& dst, double tau) {
  neural::soft_update(src.hyper_w1, dst.hyper_w1, tau);
  neural::soft_update(src.hyper_b1, dst.hyper_b1, tau);
  neural::soft_update(src.hyper_w2, dst.hyper_w2, tau);
  neural::soft_update(src.hyper_b2, dst.hyper_b2, tau);
}

}  // namespace coopdrive::marl
