#include "coopdrive/neural/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace coopdrive::neural {

void adam_update(const TensorViews& params, const ConstTensorViews& grads, AdamState& state,
                 double lr) {
  if (params.size() != grads.size()) throw DimensionError("adam: tensor counts differ");
  for (std::size_t t = 0; t < params.size(); ++t) {
    if (params[t].size() != grads[t].size()) throw DimensionError("adam: tensor sizes differ");
    for (double g : grads[t]) {
      if (!std::isfinite(g)) throw std::domain_error("adam: nonfinite gradient entry");
    }
  }
  if (state.first_moment.empty() && state.step == 0) {
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.size(), 0.0);
      state.second_moment.emplace_back(p.size(), 0.0);
    }
  }
  if (state.first_moment.size() != params.size()) {
    throw DimensionError("adam: accumulator shapes do not match parameters");
  }
  for (std::size_t t = 0; t < params.size(); ++t) {
    if (state.first_moment[t].size() != params[t].size()) {
      throw DimensionError("adam: accumulator shapes do not match parameters");
    }
  }

  const auto& cfg = state.config;
  ++state.step;
  const double step = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(cfg.beta1, step);
  const double correction2 = 1.0 - std::pow(cfg.beta2, step);
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto& m = state.first_moment[t];
    auto& v = state.second_moment[t];
    const auto g = grads[t];
    auto p = params[t];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  }
}

void adam_step(Mlp& params, const Mlp& grads, AdamState& state, double lr) {
  adam_update(params.views(), grads.views(), state, lr);
}

double clip_global_norm(const TensorViews& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& g : grads) {
    for (double x : g) sq += x * x;
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (const auto& g : grads) {
      for (double& x : g) x *= scale;
    }
  }
  return norm;
}

}  // namespace coopdrive::neural
