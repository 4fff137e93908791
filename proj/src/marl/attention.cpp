#include "coopdrive/marl/attention.hpp"

#include <cmath>
#include <stdexcept>

namespace coopdrive::marl {

using neural::DimensionError;
using neural::OutputActivation;

namespace {

Matrix glorot(std::size_t rows, std::size_t cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix m(rows, cols);
  for (double& x : m.values()) x = dist(rng);
  return m;
}

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += a[k] * b[k];
  return s;
}

void blend(std::span<const double> src, std::span<double> dst, double tau) {
  for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = tau * src[k] + (1.0 - tau) * dst[k];
}

Matrix hstack(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), a.cols() + b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto dst = out.row_span(r);
    std::copy(a.row_span(r).begin(), a.row_span(r).end(), dst.begin());
    std::copy(b.row_span(r).begin(), b.row_span(r).end(), dst.begin() + static_cast<std::ptrdiff_t>(a.cols()));
  }
  return out;
}

void add_into(Matrix& dst, const Matrix& src) {
  auto d = dst.values();
  auto s = src.values();
  for (std::size_t k = 0; k < d.size(); ++k) d[k] += s[k];
}

}  // namespace

AttentionParams::AttentionParams(std::size_t robots, std::size_t obs_dim, std::size_t actions, std::size_t embed,
                                 std::size_t hidden, Rng& rng) {
  if (robots < 2) throw std::invalid_argument("attention critic needs at least two robots");
  w_q = glorot(embed, embed, rng);
  w_k = glorot(embed, embed, rng);
  v = glorot(embed, embed, rng);
  for (std::size_t i = 0; i < robots; ++i) {
    encoders.emplace_back(std::initializer_list<std::size_t>{obs_dim, embed}, OutputActivation::kLinear, rng);
    sa_encoders.emplace_back(std::initializer_list<std::size_t>{obs_dim + actions, embed},
                             OutputActivation::kLinear, rng);
    heads.emplace_back(std::initializer_list<std::size_t>{2 * embed, hidden, actions}, OutputActivation::kLinear,
                       rng);
  }
}

AttentionParams AttentionParams::zeros_like() const {
  AttentionParams z;
  z.w_q = Matrix(w_q.rows(), w_q.cols());
  z.w_k = Matrix(w_k.rows(), w_k.cols());
  z.v = Matrix(v.rows(), v.cols());
  for (const auto& m : encoders) z.encoders.push_back(m.zeros_like());
  for (const auto& m : sa_encoders) z.sa_encoders.push_back(m.zeros_like());
  for (const auto& m : heads) z.heads.push_back(m.zeros_like());
  z.leak = leak;
  return z;
}

void AttentionParams::append_views(neural::TensorViews& out) {
  out.push_back(w_q.values());
  out.push_back(w_k.values());
  out.push_back(v.values());
  for (auto& m : encoders) m.append_views(out);
  for (auto& m : sa_encoders) m.append_views(out);
  for (auto& m : heads) m.append_views(out);
}

void AttentionParams::append_views(neural::ConstTensorViews& out) const {
  out.push_back(w_q.values());
  out.push_back(w_k.values());
  out.push_back(v.values());
  for (const auto& m : encoders) m.append_views(out);
  for (const auto& m : sa_encoders) m.append_views(out);
  for (const auto& m : heads) m.append_views(out);
}

AttentionOutput maac_attention(std::span<const std::vector<double>> e, std::span<const std::vector<double>> g,
                               const AttentionParams& p, std::size_t i) {
  const std::size_t n = e.size();
  if (n < 2) throw std::invalid_argument("attention needs at least two robots");
  if (g.size() != n || i >= n) throw std::invalid_argument("attention inputs disagree on robot count");
  const std::size_t dk = p.w_q.rows();
  const std::size_t embed = p.v.rows();

  auto project = [](const Matrix& w, const std::vector<double>& x) {
    if (x.size() != w.cols()) throw DimensionError("attention embedding size mismatch");
    std::vector<double> out(w.rows());
    for (std::size_t r = 0; r < w.rows(); ++r) out[r] = dot(w.row_span(r).data(), x.data(), x.size());
    return out;
  };
  const auto query = project(p.w_q, e[i]);

  AttentionOutput out;
  std::vector<double> scores;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    const auto key = project(p.w_k, e[j]);
    scores.push_back(dot(key.data(), query.data(), dk));
    out.others.push_back(j);
  }
  out.alpha = neural::softmax(scores);
  out.x.assign(embed, 0.0);
  for (std::size_t k = 0; k < out.others.size(); ++k) {
    auto value = project(p.v, g[out.others[k]]);
    for (std::size_t c = 0; c < embed; ++c) {
      const double h = value[c] > 0.0 ? value[c] : p.leak * value[c];
      out.x[c] += out.alpha[k] * h;
    }
  }
  return out;
}

const std::vector<Matrix>& attention_critic_forward(const AttentionParams& p, const std::vector<Matrix>& obs,
                                                    const std::vector<Matrix>& actions, AttentionCache& c) {
  const std::size_t n = p.robots();
  if (obs.size() != n || actions.size() != n) throw DimensionError("attention critic arity mismatch");
  const std::size_t batch = obs.front().rows();
  const std::size_t dk = p.w_q.rows();
  const std::size_t embed = p.embed();

  c.enc.resize(n);
  c.sa_enc.resize(n);
  c.head.resize(n);
  c.e.resize(n);
  c.g.resize(n);
  c.query.resize(n);
  c.key.resize(n);
  c.value_pre.resize(n);
  c.value.resize(n);
  c.alpha.resize(n);
  c.q.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    neural::forward_batch(p.encoders[k], obs[k], c.enc[k]);
    c.e[k] = c.enc[k].output;
    neural::forward_batch(p.sa_encoders[k], hstack(obs[k], actions[k]), c.sa_enc[k]);
    c.g[k] = c.sa_enc[k].output;
    neural::matmul_nt(c.e[k], p.w_q, c.query[k]);
    neural::matmul_nt(c.e[k], p.w_k, c.key[k]);
    neural::matmul_nt(c.g[k], p.v, c.value_pre[k]);
    c.value[k] = c.value_pre[k];
    for (double& x : c.value[k].values()) x = x > 0.0 ? x : p.leak * x;
  }

  std::vector<double> scores(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    c.alpha[i] = Matrix(batch, n - 1);
    Matrix x(batch, embed);
    for (std::size_t b = 0; b < batch; ++b) {
      const double* qi = c.query[i].row_span(b).data();
      std::size_t slot = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        scores[slot++] = dot(c.key[j].row_span(b).data(), qi, dk);
      }
      const auto a = neural::softmax(scores);
      double* xr = x.row_span(b).data();
      slot = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        c.alpha[i](b, slot) = a[slot];
        const double* vj = c.value[j].row_span(b).data();
        for (std::size_t d = 0; d < embed; ++d) xr[d] += a[slot] * vj[d];
        ++slot;
      }
    }
    neural::forward_batch(p.heads[i], hstack(c.e[i], x), c.head[i]);
    c.q[i] = c.head[i].output;
  }
  return c.q;
}

void attention_critic_backward(const AttentionParams& p, const AttentionCache& c, const std::vector<Matrix>& q_grad,
                               AttentionParams& grads) {
  const std::size_t n = p.robots();
  if (q_grad.size() != n) throw DimensionError("attention critic gradient arity mismatch");
  const std::size_t batch = c.e.front().rows();
  const std::size_t dk = p.w_q.rows();
  const std::size_t embed = p.embed();

  std::vector<Matrix> de(n, Matrix(batch, embed)), dquery(n, Matrix(batch, dk)), dkey(n, Matrix(batch, dk)),
      dvalue(n, Matrix(batch, embed));
  std::vector<double> dalpha(n - 1), dscore(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    Matrix dhead_in;
    neural::backward_batch(p.heads[i], c.head[i], q_grad[i], grads.heads[i], &dhead_in);
    for (std::size_t b = 0; b < batch; ++b) {
      const double* din = dhead_in.row_span(b).data();
      double* de_i = de[i].row_span(b).data();
      for (std::size_t d = 0; d < embed; ++d) de_i[d] += din[d];
      const double* dx = din + embed;

      std::size_t slot = 0;
      double weighted = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double a = c.alpha[i](b, slot);
        dalpha[slot] = dot(dx, c.value[j].row_span(b).data(), embed);
        weighted += a * dalpha[slot];
        double* dv = dvalue[j].row_span(b).data();
        for (std::size_t d = 0; d < embed; ++d) dv[d] += a * dx[d];
        ++slot;
      }
      slot = 0;
      const double* qi = c.query[i].row_span(b).data();
      double* dqi = dquery[i].row_span(b).data();
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        dscore[slot] = c.alpha[i](b, slot) * (dalpha[slot] - weighted);
        const double* kj = c.key[j].row_span(b).data();
        double* dkj = dkey[j].row_span(b).data();
        for (std::size_t d = 0; d < dk; ++d) {
          dkj[d] += dscore[slot] * qi[d];
          dqi[d] += dscore[slot] * kj[d];
        }
        ++slot;
      }
    }
  }

  for (std::size_t k = 0; k < n; ++k) {
    // Query and key projections.
    neural::matmul_tn_accumulate(dquery[k], c.e[k], grads.w_q);
    neural::matmul_tn_accumulate(dkey[k], c.e[k], grads.w_k);
    Matrix tmp;
    neural::matmul_nn(dquery[k], p.w_q, tmp);
    add_into(de[k], tmp);
    neural::matmul_nn(dkey[k], p.w_k, tmp);
    add_into(de[k], tmp);
    neural::backward_batch(p.encoders[k], c.enc[k], de[k], grads.encoders[k]);

    // Value path through the leaky rectifier.
    Matrix dpre = dvalue[k];
    auto pre = c.value_pre[k].values();
    auto dp = dpre.values();
    for (std::size_t t = 0; t < dp.size(); ++t) {
      if (pre[t] <= 0.0) dp[t] *= p.leak;
    }
    neural::matmul_tn_accumulate(dpre, c.g[k], grads.v);
    Matrix dg;
    neural::matmul_nn(dpre, p.v, dg);
    neural::backward_batch(p.sa_encoders[k], c.sa_enc[k], dg, grads.sa_encoders[k]);
  }
}

void soft_update(const AttentionParams& src, AttentionParams& dst, double tau) {
  blend(src.w_q.values(), dst.w_q.values(), tau);
  blend(src.w_k.values(), dst.w_k.values(), tau);
  blend(src.v.values(), dst.v.values(), tau);
  for (std::size_t k = 0; k < src.robots(); ++k) {
    neural::soft_update(src.encoders[k], dst.encoders[k], tau);
    neural::soft_update(src.sa_encoders[k], dst.sa_encoders[k], tau);
    neural::soft_update(src.heads[k], dst.heads[k], tau);
  }
}

}  // namespace coopdrive::marl
