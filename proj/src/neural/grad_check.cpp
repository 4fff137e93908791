#include "coopdrive/neural/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace coopdrive::neural {

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

double max_relative_error(const TensorViews& params, const ConstTensorViews& analytic,
                          const std::function<double()>& loss, double h) {
  if (params.size() != analytic.size()) throw DimensionError("grad check: tensor counts differ");
  double worst = 0.0;
  for (std::size_t t = 0; t < params.size(); ++t) {
    if (params[t].size() != analytic[t].size()) {
      throw DimensionError("grad check: tensor sizes differ");
    }
    for (std::size_t i = 0; i < params[t].size(); ++i) {
      double& w = params[t][i];
      const double saved = w;
      w = saved + h;
      const double up = loss();
      w = saved - h;
      const double down = loss();
      w = saved;
      const double numeric = (up - down) / (2.0 * h);
      worst = std::max(worst, relative_error(analytic[t][i], numeric));
    }
  }
  return worst;
}

namespace {

double eval_loss(const Mlp& net, std::span<const double> x, const OutputLoss& loss) {
  const auto out = mlp_forward(net, x);
  std::vector<double> scratch(out.size());
  return loss(out, scratch);
}

}  // namespace

Mlp analytic_gradients(const Mlp& net, std::span<const double> x, const OutputLoss& loss) {
  MlpCache cache;
  const auto out = mlp_forward(net, x, cache);
  std::vector<double> upstream(out.size(), 0.0);
  loss(out, upstream);
  return mlp_backward(net, cache, upstream).param_grads;
}

double grad_check_against(const Mlp& net, std::span<const double> x, const OutputLoss& loss,
                          const Mlp& analytic, double h) {
  Mlp probe = net;
  return max_relative_error(probe.views(), analytic.views(),
                            [&] { return eval_loss(probe, x, loss); }, h);
}

double grad_check(const Mlp& net, std::span<const double> x, const OutputLoss& loss, double h) {
  return grad_check_against(net, x, loss, analytic_gradients(net, x, loss), h);
}

}  // namespace coopdrive::neural
