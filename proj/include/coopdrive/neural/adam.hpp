#pragma once

#include <cstdint>
#include <vector>

#include "coopdrive/neural/mlp.hpp"

namespace coopdrive::neural {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moment accumulators for one parameter list. Sized on the first step when
/// default-constructed; afterwards every step must present the same shapes.
struct AdamState {
  AdamConfig config;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
  std::int64_t step = 0;
};

/// Bias-corrected Adam update over parallel parameter/gradient views.
/// Throws DimensionError on shape mismatch and std::domain_error on a
/// nonfinite gradient (parameters are left untouched in both cases).
void adam_update(const TensorViews& params, const ConstTensorViews& grads, AdamState& state,
                 double lr);

void adam_step(Mlp& params, const Mlp& grads, AdamState& state, double lr);

/// Scales gradients in place so their joint L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
double clip_global_norm(const TensorViews& grads, double max_norm);

}  // namespace coopdrive::neural
