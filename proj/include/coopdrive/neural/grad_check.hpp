#pragma once

#include <functional>
#include <span>

#include "coopdrive/neural/mlp.hpp"

namespace coopdrive::neural {

/// Scalar loss of a network output. Must write dLoss/dOutput into `grad`.
using OutputLoss = std::function<double(std::span<const double> output, std::span<double> grad)>;

inline constexpr double kDefaultFdStep = 1e-5;

inline constexpr double kRelativeErrorFloor = 1e-5;

/// |a - n| / max(|a|, |n|, floor). Below the floor, central differences at
/// h = 1e-5 are dominated by rounding, so tiny entries compare absolutely.
double relative_error(double analytic, double numeric, double floor = kRelativeErrorFloor);

/// Worst relative error between `analytic` and central finite differences of
/// `loss` taken by perturbing each entry of `params` in place (restored after).
double max_relative_error(const TensorViews& params, const ConstTensorViews& analytic,
                          const std::function<double()>& loss, double h = kDefaultFdStep);

/// Compares mlp_backward against central differences over every parameter.
double grad_check(const Mlp& net, std::span<const double> x, const OutputLoss& loss,
                  double h = kDefaultFdStep);

/// Same comparison against caller-supplied analytic gradients.
double grad_check_against(const Mlp& net, std::span<const double> x, const OutputLoss& loss,
                          const Mlp& analytic, double h = kDefaultFdStep);

/// Analytic parameter gradients of `loss` at `x`.
Mlp analytic_gradients(const Mlp& net, std::span<const double> x, const OutputLoss& loss);

}  // namespace coopdrive::neural
