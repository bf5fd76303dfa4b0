#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "cmcfol/error.hpp"

namespace cmcfol {

using Vec = std::vector<double>;

// Dense square matrix, row-major. Dimensions here are tiny (chart dimension,
// at most 4 or so), so no effort is spent on performance beyond the obvious.
class Mat {
public:
  Mat() : n_(0) {}
  explicit Mat(int n, double fill = 0.0) : n_(n), a_(std::size_t(n) * n, fill) {}

  int dim() const { return n_; }
  double& operator()(int i, int j) { return a_[std::size_t(i) * n_ + j]; }
  double operator()(int i, int j) const { return a_[std::size_t(i) * n_ + j]; }

  static Mat identity(int n) {
    Mat m(n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  Mat transpose() const {
    Mat t(n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  void symmetrize() {
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j) {
        double m = 0.5 * ((*this)(i, j) + (*this)(j, i));
        (*this)(i, j) = m;
        (*this)(j, i) = m;
      }
  }

  double max_abs() const {
    double m = 0.0;
    for (double x : a_) m = std::max(m, std::abs(x));
    return m;
  }

private:
  int n_;
  std::vector<double> a_;
};

inline Mat operator+(const Mat& a, const Mat& b) {
  Mat c(a.dim());
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) c(i, j) = a(i, j) + b(i, j);
  return c;
}

inline Mat operator-(const Mat& a, const Mat& b) {
  Mat c(a.dim());
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) c(i, j) = a(i, j) - b(i, j);
  return c;
}

inline Mat operator*(double s, const Mat& a) {
  Mat c(a.dim());
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) c(i, j) = s * a(i, j);
  return c;
}

inline Mat matmul(const Mat& a, const Mat& b) {
  int n = a.dim();
  Mat c(n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

// Cholesky factor L with A = L L^T. Throws a domain error when A is not
// positive definite; this is the single gate through which every metric
// evaluation passes.
inline Mat cholesky(const Mat& a, const char* what = "matrix") {
  int n = a.dim();
  Mat l(n);
  for (int j = 0; j < n; ++j) {
    double d = a(j, j);
    for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0) || !std::isfinite(d))
      throw_domain(std::string(what) + " is not positive definite");
    l(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

// Inverse of a symmetric positive definite matrix via its Cholesky factor.
inline Mat spd_inverse(const Mat& a, const char* what = "matrix") {
  int n = a.dim();
  Mat l = cholesky(a, what);
  // Solve L L^T X = I column by column.
  Mat inv(n);
  std::vector<double> y(n);
  for (int c = 0; c < n; ++c) {
    for (int i = 0; i < n; ++i) {
      double s = (i == c) ? 1.0 : 0.0;
      for (int k = 0; k < i; ++k) s -= l(i, k) * y[k];
      y[i] = s / l(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
      double s = y[i];
      for (int k = i + 1; k < n; ++k) s -= l(k, i) * inv(k, c);
      inv(i, c) = s / l(i, i);
    }
  }
  inv.symmetrize();
  return inv;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// v^a = g^{ab} u_b
inline Vec raise_index(const Mat& ginv, std::span<const double> u) {
  int n = ginv.dim();
  Vec v(n, 0.0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) v[a] += ginv(a, b) * u[b];
  return v;
}

// Rank-3 tensor with one upper and two lower indices, e.g. Christoffel
// symbols Gamma^a_{bc}; layout t(a,b,c).
class Tensor3 {
public:
  Tensor3() : n_(0) {}
  explicit Tensor3(int n) : n_(n), a_(std::size_t(n) * n * n, 0.0) {}

  int dim() const { return n_; }
  double& operator()(int a, int b, int c) {
    return a_[(std::size_t(a) * n_ + b) * n_ + c];
  }
  double operator()(int a, int b, int c) const {
    return a_[(std::size_t(a) * n_ + b) * n_ + c];
  }

private:
  int n_;
  std::vector<double> a_;
};

}  // namespace cmcfol
