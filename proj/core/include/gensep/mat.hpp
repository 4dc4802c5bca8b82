#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "gensep/rng.hpp"

namespace gensep {

// Dense row-major matrix of doubles. Column vectors are rows x 1 matrices.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  Mat(std::size_t rows, std::size_t cols, double fill)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Mat(std::size_t rows, std::size_t cols, std::initializer_list<double> vals);

  static Mat randn(std::size_t rows, std::size_t cols, double stddev, Rng& rng);
  static Mat rand_uniform(std::size_t rows, std::size_t cols, double lo,
                          double hi, Rng& rng);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }
  double& operator[](std::size_t k) { return data_[k]; }
  double operator[](std::size_t k) const { return data_[k]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool same_shape(const Mat& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }
  bool is_finite() const;

  Mat& operator+=(const Mat& o);
  Mat& operator-=(const Mat& o);
  Mat& operator*=(double s);

  double sum() const;
  double min() const;
  double max() const;

  // Returns a rows x 1 vector of per-row sums.
  Mat row_sums() const;

  // Extracts the contiguous column block [j0, j0+n).
  Mat col_block(std::size_t j0, std::size_t n) const;
  // Extracts one column as a rows x 1 vector.
  Mat col(std::size_t j) const { return col_block(j, 1); }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Mat operator+(Mat a, const Mat& b);
Mat operator-(Mat a, const Mat& b);
Mat operator*(Mat a, double s);
Mat operator*(double s, Mat a);

// a * b
Mat matmul(const Mat& a, const Mat& b);
// transpose(a) * b
Mat matmul_tn(const Mat& a, const Mat& b);
// a * transpose(b)
Mat matmul_nt(const Mat& a, const Mat& b);

Mat transpose(const Mat& a);
Mat hadamard(const Mat& a, const Mat& b);
// Elementwise a / max(b, floor).
Mat divide_floored(const Mat& a, const Mat& b, double floor);

// Adds the column vector v (rows x 1) to every column of m.
void add_col_broadcast(Mat& m, const Mat& v);

enum class Activation { Softplus, Tanh, Sigmoid, Relu, Identity };

double softplus(double x);
double sigmoid(double x);

// Elementwise activation.
Mat apply_activation(const Mat& x, Activation kind);
// Elementwise derivative of the activation, evaluated at pre-activation x.
Mat activation_grads(const Mat& x, Activation kind);

Mat softplus(const Mat& x);

// Clamps every entry to [lo, hi]. Idempotent.
void clip_inplace(Mat& m, double lo, double hi);

// Places b to the right of a (same row count).
Mat hconcat(const Mat& a, const Mat& b);

}  // namespace gensep
