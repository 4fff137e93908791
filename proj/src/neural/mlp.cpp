#include "coopdrive/neural/mlp.hpp"

#include <cmath>
#include <string>

namespace coopdrive::neural {

Mlp::Mlp(std::span<const std::size_t> widths, OutputActivation head, Rng& rng) : head_(head) {
  if (widths.size() < 2) throw DimensionError("an MLP needs at least input and output widths");
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const std::size_t in = widths[l];
    const std::size_t out = widths[l + 1];
    if (in == 0 || out == 0) throw DimensionError("layer widths must be positive");
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Dense layer{Matrix(out, in), std::vector<double>(out, 0.0)};
    for (double& w : layer.weight.values()) w = dist(rng);
    layers_.push_back(std::move(layer));
  }
}

Mlp::Mlp(std::vector<Dense> layers, OutputActivation head) : layers_(std::move(layers)), head_(head) {
  if (layers_.empty()) throw DimensionError("an MLP needs at least one layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (layers_[l].bias.size() != layers_[l].weight.rows()) {
      throw DimensionError("layer " + std::to_string(l) + ": bias length differs from output width");
    }
    if (l > 0 && layers_[l].weight.cols() != layers_[l - 1].weight.rows()) {
      throw DimensionError("layer " + std::to_string(l) + ": input width does not chain");
    }
  }
}

Mlp Mlp::zeros_like() const {
  Mlp z = *this;
  for (auto& layer : z.layers_) {
    layer.weight.fill(0.0);
    std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
  }
  return z;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += layer.weight.size() + layer.bias.size();
  return n;
}

void Mlp::append_views(TensorViews& out) {
  for (auto& layer : layers_) {
    out.push_back(layer.weight.values());
    out.push_back(layer.bias);
  }
}

void Mlp::append_views(ConstTensorViews& out) const {
  for (const auto& layer : layers_) {
    out.push_back(layer.weight.values());
    out.push_back(layer.bias);
  }
}

TensorViews Mlp::views() {
  TensorViews v;
  append_views(v);
  return v;
}

ConstTensorViews Mlp::views() const {
  ConstTensorViews v;
  append_views(v);
  return v;
}

void forward_batch(const Mlp& net, const Matrix& x, MlpCache& cache) {
  if (x.cols() != net.input_dim()) {
    throw DimensionError("MLP input has width " + std::to_string(x.cols()) + ", expected " +
                         std::to_string(net.input_dim()));
  }
  const auto& layers = net.layers();
  cache.inputs.resize(layers.size());
  cache.inputs[0] = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Matrix& z = (l + 1 < layers.size()) ? cache.inputs[l + 1] : cache.output;
    matmul_nt(cache.inputs[l], layers[l].weight, z);
    const auto& b = layers[l].bias;
    const bool hidden = l + 1 < layers.size();
    for (std::size_t r = 0; r < z.rows(); ++r) {
      double* row = z.row_span(r).data();
      for (std::size_t c = 0; c < z.cols(); ++c) {
        row[c] += b[c];
        if (hidden && row[c] < 0.0) row[c] = 0.0;
      }
    }
  }
  if (net.head() == OutputActivation::kSoftmax) softmax_rows(cache.output);
}

Matrix forward_batch(const Mlp& net, const Matrix& x) {
  MlpCache cache;
  forward_batch(net, x, cache);
  return std::move(cache.output);
}

void backward_batch(const Mlp& net, const MlpCache& cache, const Matrix& upstream, Mlp& grads,
                    Matrix* input_grad) {
  const auto& layers = net.layers();
  if (cache.inputs.size() != layers.size() || grads.depth() != layers.size()) {
    throw DimensionError("MLP cache or gradient buffer does not match the network");
  }
  if (upstream.rows() != cache.output.rows() || upstream.cols() != cache.output.cols()) {
    throw DimensionError("upstream gradient shape differs from the forward output");
  }

  Matrix delta = upstream;
  if (net.head() == OutputActivation::kSoftmax) {
    for (std::size_t r = 0; r < delta.rows(); ++r) {
      auto p = cache.output.row_span(r);
      auto g = delta.row_span(r);
      double dot = 0.0;
      for (std::size_t c = 0; c < g.size(); ++c) dot += g[c] * p[c];
      for (std::size_t c = 0; c < g.size(); ++c) g[c] = p[c] * (g[c] - dot);
    }
  }

  Matrix below;
  for (std::size_t li = layers.size(); li-- > 0;) {
    Dense& g = grads.layers()[li];
    matmul_tn_accumulate(delta, cache.inputs[li], g.weight);
    for (std::size_t r = 0; r < delta.rows(); ++r) {
      const double* row = delta.row_span(r).data();
      for (std::size_t c = 0; c < delta.cols(); ++c) g.bias[c] += row[c];
    }
    if (li == 0 && input_grad == nullptr) break;
    matmul_nn(delta, layers[li].weight, below);
    if (li == 0) {
      *input_grad = std::move(below);
      break;
    }
    // Rectifier gate: the stored input of layer li is the post-activation of li-1.
    const Matrix& act = cache.inputs[li];
    for (std::size_t r = 0; r < below.rows(); ++r) {
      double* row = below.row_span(r).data();
      const double* a = act.row_span(r).data();
      for (std::size_t c = 0; c < below.cols(); ++c) {
        if (a[c] <= 0.0) row[c] = 0.0;
      }
    }
    std::swap(delta, below);
  }
}

std::vector<double> mlp_forward(const Mlp& net, std::span<const double> x, MlpCache& cache) {
  forward_batch(net, Matrix::row(x), cache);
  auto out = cache.output.row_span(0);
  return {out.begin(), out.end()};
}

std::vector<double> mlp_forward(const Mlp& net, std::span<const double> x) {
  MlpCache cache;
  return mlp_forward(net, x, cache);
}

MlpBackward mlp_backward(const Mlp& net, const MlpCache& cache, std::span<const double> upstream) {
  MlpBackward result{net.zeros_like(), {}};
  Matrix dx;
  backward_batch(net, cache, Matrix::row(upstream), result.param_grads, &dx);
  auto row = dx.row_span(0);
  result.input_grad.assign(row.begin(), row.end());
  return result;
}

void soft_update(const Mlp& src, Mlp& dst, double tau) {
  auto s = src.views();
  auto d = dst.views();
  if (s.size() != d.size()) throw DimensionError("soft_update: network shapes differ");
  for (std::size_t t = 0; t < s.size(); ++t) {
    if (s[t].size() != d[t].size()) throw DimensionError("soft_update: tensor sizes differ");
    for (std::size_t i = 0; i < s[t].size(); ++i) d[t][i] = tau * s[t][i] + (1.0 - tau) * d[t][i];
  }
}

}  // namespace coopdrive::neural
