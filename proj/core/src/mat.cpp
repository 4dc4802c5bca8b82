#include "gensep/mat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gensep/errors.hpp"

namespace gensep {

namespace {

void require_same_shape(const Mat& a, const Mat& b, const char* what) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(what) + ": shape mismatch " +
                         std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " +
                         std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  }
}

}  // namespace

Mat::Mat(std::size_t rows, std::size_t cols, std::initializer_list<double> vals)
    : rows_(rows), cols_(cols), data_(vals) {
  if (data_.size() != rows * cols) {
    throw DimensionError("Mat initializer size does not match rows*cols");
  }
}

Mat Mat::randn(std::size_t rows, std::size_t cols, double stddev, Rng& rng) {
  Mat m(rows, cols);
  for (std::size_t k = 0; k < m.size(); ++k) m[k] = stddev * rng.normal();
  return m;
}

Mat Mat::rand_uniform(std::size_t rows, std::size_t cols, double lo, double hi,
                      Rng& rng) {
  Mat m(rows, cols);
  for (std::size_t k = 0; k < m.size(); ++k) m[k] = rng.uniform(lo, hi);
  return m;
}

bool Mat::is_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Mat& Mat::operator+=(const Mat& o) {
  require_same_shape(*this, o, "Mat+=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
  return *this;
}

Mat& Mat::operator-=(const Mat& o) {
  require_same_shape(*this, o, "Mat-=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
  return *this;
}

Mat& Mat::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

double Mat::sum() const {
  double acc = 0.0;
  for (double v : data_) acc += v;
  return acc;
}

double Mat::min() const {
  double m = std::numeric_limits<double>::infinity();
  for (double v : data_) m = std::min(m, v);
  return m;
}

double Mat::max() const {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : data_) m = std::max(m, v);
  return m;
}

Mat Mat::row_sums() const {
  Mat out(rows_, 1);
  for (std::size_t i = 0; i < rows_; ++i) {
    double acc = 0.0;
    const double* row = data_.data() + i * cols_;
    for (std::size_t j = 0; j < cols_; ++j) acc += row[j];
    out(i, 0) = acc;
  }
  return out;
}

Mat Mat::col_block(std::size_t j0, std::size_t n) const {
  if (j0 + n > cols_) throw DimensionError("col_block out of range");
  Mat out(rows_, n);
  for (std::size_t i = 0; i < rows_; ++i) {
    const double* row = data_.data() + i * cols_ + j0;
    std::copy(row, row + n, out.data() + i * n);
  }
  return out;
}

Mat operator+(Mat a, const Mat& b) { return a += b; }
Mat operator-(Mat a, const Mat& b) { return a -= b; }
Mat operator*(Mat a, double s) { return a *= s; }
Mat operator*(double s, Mat a) { return a *= s; }

Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) throw DimensionError("matmul: inner dim mismatch");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  Mat c(m, n);
  // i-k-j order keeps b and c row accesses contiguous; 4-way unroll over k
  // feeds enough independent FMAs to saturate the vector units.
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c.data() + i * n;
    const double* ai = a.data() + i * k;
    std::size_t p = 0;
    for (; p + 4 <= k; p += 4) {
      const double a0 = ai[p], a1 = ai[p + 1], a2 = ai[p + 2], a3 = ai[p + 3];
      const double* b0 = b.data() + p * n;
      const double* b1 = b0 + n;
      const double* b2 = b1 + n;
      const double* b3 = b2 + n;
      for (std::size_t j = 0; j < n; ++j) {
        ci[j] += a0 * b0[j] + a1 * b1[j] + a2 * b2[j] + a3 * b3[j];
      }
    }
    for (; p < k; ++p) {
      const double a0 = ai[p];
      const double* b0 = b.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += a0 * b0[j];
    }
  }
  return c;
}

Mat matmul_tn(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("matmul_tn: inner dim mismatch");
  }
  const std::size_t m = a.cols(), k = a.rows(), n = b.cols();
  Mat c(m, n);
  for (std::size_t p = 0; p < k; ++p) {
    const double* ap = a.data() + p * m;
    const double* bp = b.data() + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double api = ap[i];
      double* ci = c.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += api * bp[j];
    }
  }
  return c;
}

Mat matmul_nt(const Mat& a, const Mat& b) {
  if (a.cols() != b.cols()) {
    throw DimensionError("matmul_nt: inner dim mismatch");
  }
  // Materializing the transpose is cheaper than a strided reduction.
  return matmul(a, transpose(b));
}

Mat transpose(const Mat& a) {
  Mat t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Mat hadamard(const Mat& a, const Mat& b) {
  require_same_shape(a, b, "hadamard");
  Mat c(a.rows(), a.cols());
  for (std::size_t k = 0; k < a.size(); ++k) c[k] = a[k] * b[k];
  return c;
}

Mat divide_floored(const Mat& a, const Mat& b, double floor) {
  require_same_shape(a, b, "divide_floored");
  Mat c(a.rows(), a.cols());
  for (std::size_t k = 0; k < a.size(); ++k) c[k] = a[k] / std::max(b[k], floor);
  return c;
}

void add_col_broadcast(Mat& m, const Mat& v) {
  if (v.rows() != m.rows() || v.cols() != 1) {
    throw DimensionError("add_col_broadcast: expected rows x 1 vector");
  }
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double* row = m.data() + i * m.cols();
    const double vi = v(i, 0);
    for (std::size_t j = 0; j < m.cols(); ++j) row[j] += vi;
  }
}

double softplus(double x) {
  // Overflow-safe: max(x,0) + log1p(exp(-|x|)).
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Mat apply_activation(const Mat& x, Activation kind) {
  Mat y(x.rows(), x.cols());
  switch (kind) {
    case Activation::Softplus:
      for (std::size_t k = 0; k < x.size(); ++k) y[k] = softplus(x[k]);
      break;
    case Activation::Tanh:
      for (std::size_t k = 0; k < x.size(); ++k) y[k] = std::tanh(x[k]);
      break;
    case Activation::Sigmoid:
      for (std::size_t k = 0; k < x.size(); ++k) y[k] = sigmoid(x[k]);
      break;
    case Activation::Relu:
      for (std::size_t k = 0; k < x.size(); ++k) y[k] = std::max(x[k], 0.0);
      break;
    case Activation::Identity:
      y = x;
      break;
    default:
      throw ConfigError("apply_activation: unknown activation kind");
  }
  return y;
}

Mat activation_grads(const Mat& x, Activation kind) {
  Mat g(x.rows(), x.cols());
  switch (kind) {
    case Activation::Softplus:
      for (std::size_t k = 0; k < x.size(); ++k) g[k] = sigmoid(x[k]);
      break;
    case Activation::Tanh:
      for (std::size_t k = 0; k < x.size(); ++k) {
        const double t = std::tanh(x[k]);
        g[k] = 1.0 - t * t;
      }
      break;
    case Activation::Sigmoid:
      for (std::size_t k = 0; k < x.size(); ++k) {
        const double s = sigmoid(x[k]);
        g[k] = s * (1.0 - s);
      }
      break;
    case Activation::Relu:
      for (std::size_t k = 0; k < x.size(); ++k) g[k] = x[k] > 0.0 ? 1.0 : 0.0;
      break;
    case Activation::Identity:
      for (std::size_t k = 0; k < x.size(); ++k) g[k] = 1.0;
      break;
    default:
      throw ConfigError("activation_grads: unknown activation kind");
  }
  return g;
}

Mat softplus(const Mat& x) { return apply_activation(x, Activation::Softplus); }

void clip_inplace(Mat& m, double lo, double hi) {
  if (lo > hi) throw ConfigError("clip_inplace: lo > hi");
  for (std::size_t k = 0; k < m.size(); ++k) m[k] = std::clamp(m[k], lo, hi);
}

Mat hconcat(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows()) throw DimensionError("hconcat: row count mismatch");
  Mat c(a.rows(), a.cols() + b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    std::copy(a.data() + i * a.cols(), a.data() + (i + 1) * a.cols(),
              c.data() + i * c.cols());
    std::copy(b.data() + i * b.cols(), b.data() + (i + 1) * b.cols(),
              c.data() + i * c.cols() + a.cols());
  }
  return c;
}

}  // namespace gensep
