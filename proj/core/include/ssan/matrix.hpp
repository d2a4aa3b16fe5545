#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace ssan {

/// Floor applied to probabilities before taking logs.
inline constexpr double kLogFloor = 1e-12;
/// Discriminator outputs are clamped to [kSigmoidClamp, 1 - kSigmoidClamp].
inline constexpr double kSigmoidClamp = 1e-7;

/// Dense row-major matrix of doubles. Every reduction in the kernels below
/// runs in fixed left-to-right index order, so identical inputs give
/// bit-identical outputs.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool all_finite() const;
  std::string shape_str() const;

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Throws DimensionError naming both shapes unless a and b match exactly.
void require_same_shape(const Matrix& a, const Matrix& b, const char* op);

// ---- elementwise ----
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix scaled(const Matrix& a, double c);
void add_in_place(Matrix& a, const Matrix& b);

// ---- products ----
Matrix matmul(const Matrix& a, const Matrix& b);           // a[n x k] * b[k x m]
Matrix matmul_transpose_a(const Matrix& a, const Matrix& b);  // a^T * b
Matrix matmul_transpose_b(const Matrix& a, const Matrix& b);  // a * b^T

/// y = x * w + b with the 1 x h bias broadcast over rows.
Matrix affine(const Matrix& x, const Matrix& w, const Matrix& b);

// ---- activations ----
Matrix leaky_relu(const Matrix& x, double slope);
/// Row-wise softmax(x / temperature) with row-max subtraction; each output
/// row sums to 1. temperature must be > 0.
Matrix softmax_rows(const Matrix& x, double temperature);
/// Elementwise logistic, clamped to [kSigmoidClamp, 1 - kSigmoidClamp].
Matrix logistic_clamped(const Matrix& x);
/// Elementwise log(max(x, floor)).
Matrix log_clamped(const Matrix& x, double floor = kLogFloor);

// ---- reshaping / reductions ----
Matrix select_rows(const Matrix& x, std::span<const std::size_t> indices);
Matrix concat_rows(const Matrix& a, const Matrix& b);
Matrix mean_rows(const Matrix& x);  // 1 x cols column means; rows must be >= 1
double sum_all(const Matrix& x);
double mean_all(const Matrix& x);
double sum_squares(const Matrix& x);
/// out[i] = x(i, cols[i]); cols.size() must equal x.rows().
Matrix gather_cols(const Matrix& x, std::span<const int> cols);

/// Index of the largest entry; ties break toward the lowest index.
std::size_t argmax(std::span<const double> v);

}  // namespace ssan
