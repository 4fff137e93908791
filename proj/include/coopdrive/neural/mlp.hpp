#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "coopdrive/neural/matrix.hpp"
#include "coopdrive/rng.hpp"

namespace coopdrive::neural {

enum class OutputActivation { kLinear, kSoftmax };

/// Affine layer y = W x + b with W stored as (out x in).
struct Dense {
  Matrix weight;
  std::vector<double> bias;

  friend bool operator==(const Dense&, const Dense&) = default;
};

/// Ordered views over learnable tensors. Optimizers and gradient checks walk
/// these in a fixed order, so two views built the same way line up.
using TensorViews = std::vector<std::span<double>>;
using ConstTensorViews = std::vector<std::span<const double>>;

/// Multilayer perceptron with rectifier hidden units.
class Mlp {
 public:
  Mlp() = default;
  /// `widths` = {in, hidden..., out}. Weights are Glorot-uniform, biases zero.
  Mlp(std::span<const std::size_t> widths, OutputActivation head, Rng& rng);
  Mlp(std::initializer_list<std::size_t> widths, OutputActivation head, Rng& rng)
      : Mlp(std::span<const std::size_t>(widths.begin(), widths.size()), head, rng) {}
  Mlp(std::vector<Dense> layers, OutputActivation head);

  Mlp zeros_like() const;

  std::size_t input_dim() const { return layers_.front().weight.cols(); }
  std::size_t output_dim() const { return layers_.back().weight.rows(); }
  std::size_t depth() const { return layers_.size(); }
  std::size_t parameter_count() const;
  OutputActivation head() const { return head_; }

  std::vector<Dense>& layers() { return layers_; }
  const std::vector<Dense>& layers() const { return layers_; }

  void append_views(TensorViews& out);
  void append_views(ConstTensorViews& out) const;
  TensorViews views();
  ConstTensorViews views() const;

  friend bool operator==(const Mlp&, const Mlp&) = default;

 private:
  std::vector<Dense> layers_;
  OutputActivation head_ = OutputActivation::kLinear;
};

/// Per-layer inputs recorded during a batched forward pass. `inputs[l]` is the
/// input to layer l (rows = batch); `output` is the head output.
struct MlpCache {
  std::vector<Matrix> inputs;
  Matrix output;
};

/// Batched forward pass; rows of `x` are samples.
void forward_batch(const Mlp& net, const Matrix& x, MlpCache& cache);
Matrix forward_batch(const Mlp& net, const Matrix& x);

/// Batched reverse pass. Parameter gradients are summed over the batch and
/// accumulated into `grads`; `input_grad`, when given, receives dL/dx.
void backward_batch(const Mlp& net, const MlpCache& cache, const Matrix& upstream, Mlp& grads,
                    Matrix* input_grad = nullptr);

struct MlpBackward {
  Mlp param_grads;
  std::vector<double> input_grad;
};

std::vector<double> mlp_forward(const Mlp& net, std::span<const double> x, MlpCache& cache);
std::vector<double> mlp_forward(const Mlp& net, std::span<const double> x);
MlpBackward mlp_backward(const Mlp& net, const MlpCache& cache, std::span<const double> upstream);

/// Copies `src` into `dst`, or blends dst <- tau * src + (1 - tau) * dst.
void soft_update(const Mlp& src, Mlp& dst, double tau);

}  // namespace coopdrive::neural
