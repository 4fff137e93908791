#include "coopdrive/neural/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace coopdrive::neural {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw DimensionError("matrix payload has " + std::to_string(data_.size()) +
                         " entries, expected " + std::to_string(rows_ * cols_));
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::row(std::span<const double> values) {
  return Matrix(1, values.size(), std::vector<double>(values.begin(), values.end()));
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.cols() != b.cols()) throw DimensionError("matmul_nt: inner dimensions differ");
  if (out.rows() != a.rows() || out.cols() != b.rows()) out = Matrix(a.rows(), b.rows());
  const std::size_t k = a.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ar = a.row_span(i).data();
    double* orow = out.row_span(i).data();
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const double* br = b.row_span(j).data();
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += ar[p] * br[p];
      orow[j] = acc;
    }
  }
}

void matmul_tn_accumulate(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.rows() != b.rows()) throw DimensionError("matmul_tn: row counts differ");
  if (out.rows() != a.cols() || out.cols() != b.cols()) {
    throw DimensionError("matmul_tn: output shape mismatch");
  }
  const std::size_t k = b.cols();
  for (std::size_t n = 0; n < a.rows(); ++n) {
    const double* ar = a.row_span(n).data();
    const double* br = b.row_span(n).data();
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double s = ar[i];
      if (s == 0.0) continue;
      double* orow = out.row_span(i).data();
      for (std::size_t j = 0; j < k; ++j) orow[j] += s * br[j];
    }
  }
}

void matmul_nn(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.cols() != b.rows()) throw DimensionError("matmul_nn: inner dimensions differ");
  if (out.rows() != a.rows() || out.cols() != b.cols()) out = Matrix(a.rows(), b.cols());
  out.fill(0.0);
  const std::size_t m = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ar = a.row_span(i).data();
    double* orow = out.row_span(i).data();
    for (std::size_t p = 0; p < a.cols(); ++p) {
      const double s = ar[p];
      if (s == 0.0) continue;
      const double* br = b.row_span(p).data();
      for (std::size_t j = 0; j < m; ++j) orow[j] += s * br[j];
    }
  }
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.begin(), logits.end());
  if (out.empty()) return out;
  const double mx = *std::max_element(out.begin(), out.end());
  double total = 0.0;
  for (double& x : out) {
    x = std::exp(x - mx);
    total += x;
  }
  for (double& x : out) x /= total;
  return out;
}

void softmax_rows(Matrix& m) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row_span(r);
    const auto p = softmax(row);
    std::copy(p.begin(), p.end(), row.begin());
  }
}

}  // namespace coopdrive::neural
