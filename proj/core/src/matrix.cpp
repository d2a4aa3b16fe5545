#include "ssan/matrix.hpp"

#include <cmath>

#include "ssan/errors.hpp"

namespace ssan {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m;
  m.rows_ = rows.size();
  m.cols_ = rows.size() ? rows.begin()->size() : 0;
  m.data_.reserve(m.rows_ * m.cols_);
  for (const auto& r : rows) {
    if (r.size() != m.cols_) throw DimensionError("from_rows: ragged initializer");
    m.data_.insert(m.data_.end(), r.begin(), r.end());
  }
  return m;
}

bool Matrix::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

std::string Matrix::shape_str() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.same_shape(b))
    throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_str() +
                         " vs " + b.shape_str());
}

Matrix add(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "add");
  Matrix out = a;
  auto o = out.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += bd[i];
  return out;
}

Matrix sub(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "sub");
  Matrix out = a;
  auto o = out.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= bd[i];
  return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "hadamard");
  Matrix out = a;
  auto o = out.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= bd[i];
  return out;
}

Matrix scaled(const Matrix& a, double c) {
  Matrix out = a;
  for (double& v : out.data()) v *= c;
  return out;
}

void add_in_place(Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "add_in_place");
  auto o = a.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += bd[i];
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw DimensionError("matmul: inner dimensions disagree " + a.shape_str() +
                         " vs " + b.shape_str());
  Matrix out(a.rows(), b.cols());
  // i-k-j order: the per-entry accumulation over k still runs 0..k-1
  // left to right, while the inner loop stays contiguous.
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto orow = out.row(i);
    auto arow = a.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = arow[k];
      auto brow = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

Matrix matmul_transpose_a(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows())
    throw DimensionError("matmul_transpose_a: row counts disagree " +
                         a.shape_str() + " vs " + b.shape_str());
  Matrix out(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    auto arow = a.row(k);
    auto brow = b.row(k);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = arow[i];
      auto orow = out.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += aki * brow[j];
    }
  }
  return out;
}

Matrix matmul_transpose_b(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols())
    throw DimensionError("matmul_transpose_b: column counts disagree " +
                         a.shape_str() + " vs " + b.shape_str());
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto arow = a.row(i);
    auto orow = out.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      auto brow = b.row(j);
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += arow[k] * brow[k];
      orow[j] = acc;
    }
  }
  return out;
}

Matrix affine(const Matrix& x, const Matrix& w, const Matrix& b) {
  if (x.cols() != w.rows())
    throw DimensionError("affine: input width " + x.shape_str() +
                         " does not match weight " + w.shape_str());
  if (b.rows() != 1 || b.cols() != w.cols())
    throw DimensionError("affine: bias " + b.shape_str() + " must be 1x" +
                         std::to_string(w.cols()));
  Matrix out(x.rows(), w.cols());
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto orow = out.row(i);
    auto brow = b.row(0);
    for (std::size_t j = 0; j < orow.size(); ++j) orow[j] = brow[j];
  }
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto orow = out.row(i);
    auto xrow = x.row(i);
    for (std::size_t k = 0; k < x.cols(); ++k) {
      const double xik = xrow[k];
      auto wrow = w.row(k);
      for (std::size_t j = 0; j < w.cols(); ++j) orow[j] += xik * wrow[j];
    }
  }
  return out;
}

Matrix leaky_relu(const Matrix& x, double slope) {
  if (!(slope > 0.0 && slope < 1.0))
    throw ParameterError("leaky_relu: slope must lie in (0,1)");
  Matrix out = x;
  for (double& v : out.data())
    if (v < 0.0) v *= slope;
  return out;
}

Matrix softmax_rows(const Matrix& x, double temperature) {
  if (!(temperature > 0.0))
    throw ParameterError("softmax_rows: temperature must be > 0");
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto xrow = x.row(i);
    auto orow = out.row(i);
    double mx = xrow.empty() ? 0.0 : xrow[0] / temperature;
    for (std::size_t j = 1; j < xrow.size(); ++j) mx = std::max(mx, xrow[j] / temperature);
    double denom = 0.0;
    for (std::size_t j = 0; j < xrow.size(); ++j) {
      orow[j] = std::exp(xrow[j] / temperature - mx);
      denom += orow[j];
    }
    for (std::size_t j = 0; j < xrow.size(); ++j) orow[j] /= denom;
  }
  return out;
}

Matrix logistic_clamped(const Matrix& x) {
  Matrix out = x;
  for (double& v : out.data()) {
    const double s = 1.0 / (1.0 + std::exp(-v));
    v = std::min(1.0 - kSigmoidClamp, std::max(kSigmoidClamp, s));
  }
  return out;
}

Matrix log_clamped(const Matrix& x, double floor) {
  Matrix out = x;
  for (double& v : out.data()) v = std::log(v > floor ? v : floor);
  return out;
}

Matrix select_rows(const Matrix& x, std::span<const std::size_t> indices) {
  Matrix out(indices.size(), x.cols());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= x.rows())
      throw DimensionError("select_rows: index " + std::to_string(indices[r]) +
                           " out of range for " + x.shape_str());
    auto src = x.row(indices[r]);
    auto dst = out.row(r);
    for (std::size_t j = 0; j < src.size(); ++j) dst[j] = src[j];
  }
  return out;
}

Matrix concat_rows(const Matrix& a, const Matrix& b) {
  if (a.rows() != 0 && b.rows() != 0 && a.cols() != b.cols())
    throw DimensionError("concat_rows: column counts disagree " + a.shape_str() +
                         " vs " + b.shape_str());
  const std::size_t cols = a.rows() != 0 ? a.cols() : b.cols();
  Matrix out(a.rows() + b.rows(), cols);
  auto o = out.data();
  auto ad = a.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < ad.size(); ++i) o[i] = ad[i];
  for (std::size_t i = 0; i < bd.size(); ++i) o[ad.size() + i] = bd[i];
  return out;
}

Matrix mean_rows(const Matrix& x) {
  if (x.rows() == 0) throw DimensionError("mean_rows: empty matrix");
  Matrix out(1, x.cols());
  auto orow = out.row(0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto xrow = x.row(i);
    for (std::size_t j = 0; j < xrow.size(); ++j) orow[j] += xrow[j];
  }
  const double inv = 1.0 / static_cast<double>(x.rows());
  for (double& v : orow) v *= inv;
  return out;
}

double sum_all(const Matrix& x) {
  double acc = 0.0;
  for (double v : x.data()) acc += v;
  return acc;
}

double mean_all(const Matrix& x) {
  if (x.size() == 0) throw DimensionError("mean_all: empty matrix");
  return sum_all(x) / static_cast<double>(x.size());
}

double sum_squares(const Matrix& x) {
  double acc = 0.0;
  for (double v : x.data()) acc += v * v;
  return acc;
}

Matrix gather_cols(const Matrix& x, std::span<const int> cols) {
  if (cols.size() != x.rows())
    throw DimensionError("gather_cols: need one column index per row, got " +
                         std::to_string(cols.size()) + " for " + x.shape_str());
  Matrix out(x.rows(), 1);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const int c = cols[i];
    if (c < 0 || static_cast<std::size_t>(c) >= x.cols())
      throw LabelError("gather_cols: label " + std::to_string(c) +
                       " out of range at row " + std::to_string(i));
    out(i, 0) = x(i, static_cast<std::size_t>(c));
  }
  return out;
}

std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

}  // namespace ssan
