#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace coopdrive::neural {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);
  static Matrix row(std::span<const double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row_span(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row_span(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  void fill(double v);
  bool all_finite() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// out = a * b^T  (a: n x k, b: m x k, out: n x m)
void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out);
// out += a^T * b  (a: n x m, b: n x k, out: m x k)
void matmul_tn_accumulate(const Matrix& a, const Matrix& b, Matrix& out);
// out = a * b  (a: n x k, b: k x m, out: n x m)
void matmul_nn(const Matrix& a, const Matrix& b, Matrix& out);

/// Numerically stable softmax; returns a probability vector.
std::vector<double> softmax(std::span<const double> logits);
void softmax_rows(Matrix& m);

}  // namespace coopdrive::neural
