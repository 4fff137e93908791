#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>

#include "coopdrive/neural/adam.hpp"
#include "coopdrive/neural/checkpoint.hpp"
#include "coopdrive/neural/grad_check.hpp"
#include "coopdrive/neural/mlp.hpp"

namespace coopdrive::neural {
namespace {

// 0.5 * ||y||^2 + w . y with fixed weights; smooth and exercises every output.
OutputLoss quadratic_loss(std::vector<double> w) {
  return [w = std::move(w)](std::span<const double> y, std::span<double> g) {
    double loss = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
      loss += 0.5 * y[k] * y[k] + w[k % w.size()] * y[k];
      g[k] = y[k] + w[k % w.size()];
    }
    return loss;
  };
}

OutputLoss linear_loss(std::vector<double> w) {
  return [w = std::move(w)](std::span<const double> y, std::span<double> g) {
    double loss = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
      loss += w[k] * y[k];
      g[k] = w[k];
    }
    return loss;
  };
}

std::vector<double> random_vector(std::size_t n, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

Mlp single_layer(Matrix w, std::vector<double> b, OutputActivation head) {
  return Mlp({Dense{std::move(w), std::move(b)}}, head);
}

TEST(MatrixTest, PayloadLengthMustMatchShape) {
  EXPECT_THROW(Matrix(2, 3, std::vector<double>(5)), DimensionError);
}

TEST(MatrixTest, ProductsAgreeWithHandValues) {
  const Matrix a(2, 2, {1, 2, 3, 4});
  const Matrix b(2, 2, {5, 6, 7, 8});
  Matrix nn;
  matmul_nn(a, b, nn);
  EXPECT_EQ(nn, Matrix(2, 2, {19, 22, 43, 50}));
  Matrix nt;
  matmul_nt(a, b, nt);
  EXPECT_EQ(nt, Matrix(2, 2, {17, 23, 39, 53}));
  Matrix tn(2, 2);
  matmul_tn_accumulate(a, b, tn);
  EXPECT_EQ(tn, Matrix(2, 2, {26, 30, 38, 44}));
}

TEST(SoftmaxTest, ProbabilityVectorAndShiftInvariance) {
  Rng rng = make_rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto logits = random_vector(5, rng, -10, 10);
    const auto p = softmax(logits);
    double sum = 0.0;
    for (double x : p) {
      EXPECT_GE(x, 0.0);
      sum += x;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
    auto shifted = logits;
    for (auto& x : shifted) x += 7.25;
    const auto q = softmax(shifted);
    for (std::size_t k = 0; k < p.size(); ++k) EXPECT_NEAR(p[k], q[k], 1e-12);
  }
}

TEST(MlpForwardTest, ZeroNetworkOutputsZero) {
  Rng rng = make_rng(1);
  Mlp net = Mlp({3, 8, 4}, OutputActivation::kLinear, rng).zeros_like();
  const auto y = mlp_forward(net, std::vector<double>{0.3, -2.0, 5.0});
  EXPECT_EQ(y, std::vector<double>(4, 0.0));
}

TEST(MlpForwardTest, IdentityLayerPassesNonnegativeInput) {
  const Mlp net = single_layer(Matrix::identity(3), {0, 0, 0}, OutputActivation::kLinear);
  const std::vector<double> x{0.0, 1.5, 4.0};
  EXPECT_EQ(mlp_forward(net, x), x);
}

TEST(MlpForwardTest, SoftmaxHeadOnEqualLogitsIsUniform) {
  const Mlp net = single_layer(Matrix(4, 2), {0, 0, 0, 0}, OutputActivation::kSoftmax);
  const auto p = mlp_forward(net, std::vector<double>{0.7, -0.2});
  for (double x : p) EXPECT_DOUBLE_EQ(x, 0.25);
}

TEST(MlpForwardTest, InputWidthMismatchThrows) {
  Rng rng = make_rng(1);
  const Mlp net({3, 4}, OutputActivation::kLinear, rng);
  EXPECT_THROW(mlp_forward(net, std::vector<double>{1.0, 2.0}), DimensionError);
}

TEST(MlpForwardTest, BitwiseDeterministic) {
  Rng a = make_rng(9);
  Rng b = make_rng(9);
  const Mlp n1({6, 32, 32, 4}, OutputActivation::kSoftmax, a);
  const Mlp n2({6, 32, 32, 4}, OutputActivation::kSoftmax, b);
  ASSERT_EQ(n1, n2);
  const std::vector<double> x{0.1, 0.2, -0.3, 0.4, 0.5, -0.6};
  EXPECT_EQ(mlp_forward(n1, x), mlp_forward(n2, x));
}

TEST(MlpBackwardTest, LinearLayerGradientIsOuterProduct) {
  const Mlp net = single_layer(Matrix(2, 3, {1, 2, 3, 4, 5, 6}), {0.5, -0.5}, OutputActivation::kLinear);
  const std::vector<double> x{1.0, -2.0, 0.5};
  const std::vector<double> g{0.3, -1.2};
  MlpCache cache;
  mlp_forward(net, x, cache);
  const auto back = mlp_backward(net, cache, g);
  const auto& dw = back.param_grads.layers()[0].weight;
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t c = 0; c < 3; ++c) EXPECT_DOUBLE_EQ(dw(r, c), g[r] * x[c]);
  }
  EXPECT_EQ(back.param_grads.layers()[0].bias, g);
  // dx = W^T g
  EXPECT_DOUBLE_EQ(back.input_grad[0], 1 * 0.3 + 4 * -1.2);
  EXPECT_DOUBLE_EQ(back.input_grad[1], 2 * 0.3 + 5 * -1.2);
  EXPECT_DOUBLE_EQ(back.input_grad[2], 3 * 0.3 + 6 * -1.2);
}

TEST(MlpBackwardTest, RectifierBlocksNegativePreactivation) {
  // Hidden unit 0 sees +1, unit 1 sees -1.
  const Mlp net({Dense{Matrix(2, 1, {1.0, -1.0}), {0.0, 0.0}},
                 Dense{Matrix(1, 2, {1.0, 1.0}), {0.0}}},
                OutputActivation::kLinear);
  MlpCache cache;
  mlp_forward(net, std::vector<double>{1.0}, cache);
  const auto back = mlp_backward(net, cache, std::vector<double>{1.0});
  EXPECT_DOUBLE_EQ(back.param_grads.layers()[0].weight(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(back.param_grads.layers()[0].weight(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(back.param_grads.layers()[0].bias[1], 0.0);
  EXPECT_DOUBLE_EQ(back.param_grads.layers()[1].weight(0, 1), 0.0);
}

TEST(MlpBackwardTest, CacheFromAnotherNetworkIsRejected) {
  Rng rng = make_rng(2);
  const Mlp deep({3, 4, 2}, OutputActivation::kLinear, rng);
  const Mlp shallow({3, 2}, OutputActivation::kLinear, rng);
  MlpCache cache;
  mlp_forward(shallow, std::vector<double>{1, 2, 3}, cache);
  EXPECT_THROW(mlp_backward(deep, cache, std::vector<double>{1, 1}), DimensionError);
}

TEST(MlpBackwardTest, BatchedGradientsSumPerSampleGradients) {
  Rng rng = make_rng(5);
  const Mlp net({4, 16, 3}, OutputActivation::kSoftmax, rng);
  Matrix x(3, 4);
  for (double& v : x.values()) v = std::uniform_real_distribution<double>(-1, 1)(rng);
  Matrix up(3, 3);
  for (double& v : up.values()) v = std::uniform_real_distribution<double>(-1, 1)(rng);

  MlpCache cache;
  forward_batch(net, x, cache);
  Mlp batched = net.zeros_like();
  backward_batch(net, cache, up, batched);

  Mlp summed = net.zeros_like();
  for (std::size_t r = 0; r < 3; ++r) {
    MlpCache c1;
    mlp_forward(net, x.row_span(r), c1);
    const auto g = mlp_backward(net, c1, up.row_span(r)).param_grads;
    auto dst = summed.views();
    const auto src = g.views();
    for (std::size_t t = 0; t < dst.size(); ++t) {
      for (std::size_t i = 0; i < dst[t].size(); ++i) dst[t][i] += src[t][i];
    }
  }
  const auto a = batched.views();
  const auto b = summed.views();
  for (std::size_t t = 0; t < a.size(); ++t) {
    for (std::size_t i = 0; i < a[t].size(); ++i) EXPECT_NEAR(a[t][i], b[t][i], 1e-12);
  }
}

TEST(GradCheckTest, LinearModelIsNearExact) {
  Rng rng = make_rng(11);
  const Mlp net({5, 3}, OutputActivation::kLinear, rng);
  const auto x = random_vector(5, rng);
  EXPECT_LT(grad_check(net, x, linear_loss(random_vector(3, rng))), 1e-7);
}

TEST(GradCheckTest, RandomMlpWithinTolerance) {
  Rng rng = make_rng(12);
  const Mlp net({7, 32, 32, 4}, OutputActivation::kLinear, rng);
  const auto x = random_vector(7, rng);
  EXPECT_LT(grad_check(net, x, quadratic_loss(random_vector(4, rng))), 1e-4);
}

TEST(GradCheckTest, SoftmaxHeadWithinTolerance) {
  Rng rng = make_rng(13);
  const Mlp net({6, 16, 4}, OutputActivation::kSoftmax, rng);
  const auto x = random_vector(6, rng);
  EXPECT_LT(grad_check(net, x, linear_loss(random_vector(4, rng, -3, 3))), 1e-4);
}

TEST(GradCheckTest, CorruptedBackwardIsCaught) {
  Rng rng = make_rng(14);
  const Mlp net({5, 8, 3}, OutputActivation::kLinear, rng);
  const auto x = random_vector(5, rng);
  const auto loss = quadratic_loss(random_vector(3, rng));
  Mlp grads = analytic_gradients(net, x, loss);
  for (double& w : grads.layers()[1].weight.values()) w *= -1.0;
  EXPECT_GT(grad_check_against(net, x, loss, grads), 1e-2);
}

TEST(AdamTest, ZeroGradientLeavesParametersAndCountsStep) {
  Rng rng = make_rng(4);
  Mlp net({3, 4, 2}, OutputActivation::kLinear, rng);
  const Mlp before = net;
  AdamState st;
  adam_step(net, net.zeros_like(), st, 0.01);
  EXPECT_EQ(net, before);
  EXPECT_EQ(st.step, 1);
}

TEST(AdamTest, FirstStepMovesByLearningRate) {
  // m_hat = g, v_hat = g^2 after bias correction, so the step is lr * g / (|g| + eps).
  Mlp net({Dense{Matrix(1, 1, {0.0}), {0.0}}}, OutputActivation::kLinear);
  Mlp grads({Dense{Matrix(1, 1, {1.0}), {0.0}}}, OutputActivation::kLinear);
  AdamState st;
  adam_step(net, grads, st, 0.01);
  EXPECT_NEAR(net.layers()[0].weight(0, 0), -0.01 / (1.0 + 1e-8), 1e-15);
}

TEST(AdamTest, ConstantGradientDescends) {
  Mlp net({Dense{Matrix(1, 1, {0.0}), {0.0}}}, OutputActivation::kLinear);
  Mlp grads({Dense{Matrix(1, 1, {-2.0}), {0.5}}}, OutputActivation::kLinear);
  AdamState st;
  for (int i = 0; i < 100; ++i) adam_step(net, grads, st, 0.01);
  EXPECT_GT(net.layers()[0].weight(0, 0), 0.5);
  EXPECT_LT(net.layers()[0].bias[0], -0.5);
}

TEST(AdamTest, RejectsShapeMismatchAndNonfiniteGradients) {
  Rng rng = make_rng(4);
  Mlp net({3, 2}, OutputActivation::kLinear, rng);
  Mlp other({2, 2}, OutputActivation::kLinear, rng);
  AdamState st;
  EXPECT_THROW(adam_step(net, other, st, 0.01), DimensionError);
  Mlp bad = net.zeros_like();
  bad.layers()[0].bias[0] = std::numeric_limits<double>::quiet_NaN();
  const Mlp before = net;
  EXPECT_THROW(adam_step(net, bad, st, 0.01), std::domain_error);
  EXPECT_EQ(net, before);
}

TEST(SoftUpdateTest, TargetContractsGeometrically) {
  Rng rng = make_rng(21);
  const Mlp online({4, 8, 2}, OutputActivation::kLinear, rng);
  Mlp target({4, 8, 2}, OutputActivation::kLinear, rng);
  auto distance = [&] {
    double sq = 0.0;
    const auto a = online.views();
    const auto b = target.views();
    for (std::size_t t = 0; t < a.size(); ++t) {
      for (std::size_t i = 0; i < a[t].size(); ++i) sq += (a[t][i] - b[t][i]) * (a[t][i] - b[t][i]);
    }
    return std::sqrt(sq);
  };
  const double d0 = distance();
  const double tau = 0.01;
  for (int k = 1; k <= 50; ++k) soft_update(online, target, tau);
  EXPECT_NEAR(distance(), d0 * std::pow(1.0 - tau, 50), 1e-10 * d0);
  soft_update(online, target, 1.0);
  EXPECT_EQ(target, online);
}

TEST(CheckpointTest, JsonRoundTripIsExact) {
  Rng rng = make_rng(8);
  Checkpoint ck{"vdn", "lane_change", "agent_0", Mlp({5, 32, 4}, OutputActivation::kSoftmax, rng),
                {{"lr", 0.01}}, 17};
  const auto path = std::filesystem::temp_directory_path() / "coopdrive_ckpt_test.json";
  save_checkpoint(ck, path);
  const auto back = load_checkpoint(path);
  std::filesystem::remove(path);
  EXPECT_EQ(back.params, ck.params);
  EXPECT_EQ(back.algo, "vdn");
  EXPECT_EQ(back.seed, 17u);
}

}  // namespace
}  // namespace coopdrive::neural
