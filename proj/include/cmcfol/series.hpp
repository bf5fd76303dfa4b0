#pragma once

#include <algorithm>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cmcfol/error.hpp"

namespace cmcfol {

// Rectangular grid on a boundary chart. A zero-dimensional chart (empty
// shape) represents boundary-homogeneous data: every coefficient is a single
// real and tangential derivatives vanish.
struct BoundaryChart {
  enum class Stencil { Periodic, Clamped };

  std::vector<int> shape;   // nodes per tangential direction
  std::vector<double> lo, hi;
  Stencil stencil = Stencil::Clamped;

  int bdim() const { return int(shape.size()); }
  int nodes() const {
    int n = 1;
    for (int s : shape) n *= s;
    return n;
  }
  double spacing(int d) const {
    int s = shape[d];
    if (stencil == Stencil::Periodic) return (hi[d] - lo[d]) / s;
    return (hi[d] - lo[d]) / (s - 1);
  }
  std::vector<double> coords(int flat) const;
  int flat_offset(int flat, int d, int delta) const;  // grid neighbour index

  static std::shared_ptr<const BoundaryChart> homogeneous();
};

// Scalar field sampled on a boundary grid.
class BoundaryField {
public:
  BoundaryField() = default;
  BoundaryField(std::shared_ptr<const BoundaryChart> chart, double fill = 0.0)
      : chart_(std::move(chart)), v_(chart_->nodes(), fill) {}

  static BoundaryField sampled(std::shared_ptr<const BoundaryChart> chart,
                               const std::function<double(std::span<const double>)>& fn);

  const std::shared_ptr<const BoundaryChart>& chart() const { return chart_; }
  int nodes() const { return int(v_.size()); }
  double& operator[](int i) { return v_[i]; }
  double operator[](int i) const { return v_[i]; }
  bool empty() const { return v_.empty(); }

  // Central-difference tangential derivative with the chart's stencil.
  BoundaryField derivative(int dir) const;

  BoundaryField apply(const std::function<double(double)>& fn) const;
  double max_abs() const;
  double min_value() const;

private:
  std::shared_ptr<const BoundaryChart> chart_;
  std::vector<double> v_;
};

BoundaryField operator+(const BoundaryField& a, const BoundaryField& b);
BoundaryField operator-(const BoundaryField& a, const BoundaryField& b);
BoundaryField operator*(const BoundaryField& a, const BoundaryField& b);
BoundaryField operator*(double s, const BoundaryField& a);

// Truncated power series sum_j c_j(x) r^j with boundary-field coefficients.
// `order()` is the highest trustworthy coefficient; reads past it throw.
// Exact polynomials (all higher coefficients identically zero) keep full
// order through derivatives.
class BoundarySeries {
public:
  BoundarySeries() = default;
  BoundarySeries(std::shared_ptr<const BoundaryChart> chart, int order);

  static BoundarySeries constant(std::shared_ptr<const BoundaryChart> chart,
                                 double c0, int order);
  static BoundarySeries monomial(const BoundaryField& c, int power, int order);

  int order() const { return ord_; }
  int storage() const { return int(c_.size()) - 1; }
  bool exact() const { return exact_; }
  const std::shared_ptr<const BoundaryChart>& chart() const { return chart_; }

  const BoundaryField& coeff(int j) const;
  BoundaryField& coeff_ref(int j);

  // Declares how far the stored coefficients are trustworthy; used by
  // constructions that fill coefficients directly (e.g. the series matrix
  // inverse) where the result is correct to the input order but not an exact
  // polynomial.
  void mark_inexact(int order) {
    ord_ = std::min(order, storage());
    exact_ = false;
  }

  BoundarySeries truncated(int order) const;
  BoundarySeries derivative_r() const;
  BoundarySeries shifted_up(int power) const;   // multiply by r^power
  // Tangential derivative of every coefficient.
  BoundarySeries tangential_derivative(int dir) const;

  // Evaluate at a scalar r, at boundary node `node`.
  double eval(double r, int node = 0) const;

  double max_abs_coeff(int j) const { return coeff(j).max_abs(); }

private:
  std::shared_ptr<const BoundaryChart> chart_;
  std::vector<BoundaryField> c_;
  int ord_ = -1;
  bool exact_ = false;

  friend BoundarySeries operator+(const BoundarySeries&, const BoundarySeries&);
  friend BoundarySeries operator-(const BoundarySeries&, const BoundarySeries&);
  friend BoundarySeries operator*(const BoundarySeries&, const BoundarySeries&);
  friend BoundarySeries operator*(double, const BoundarySeries&);
  friend BoundarySeries recip(const BoundarySeries&);
  friend BoundarySeries sqrt_series(const BoundarySeries&);
  friend BoundarySeries exp_series(const BoundarySeries&);
  friend BoundarySeries log_series(const BoundarySeries&);
  friend BoundarySeries compose_scale(const BoundarySeries&, double);
};

BoundarySeries operator+(const BoundarySeries& a, const BoundarySeries& b);
BoundarySeries operator-(const BoundarySeries& a, const BoundarySeries& b);
BoundarySeries operator*(const BoundarySeries& a, const BoundarySeries& b);
BoundarySeries operator*(double s, const BoundarySeries& a);

// 1/a; requires c_0 bounded away from zero on the whole grid.
BoundarySeries recip(const BoundarySeries& a);
// sqrt(a); requires c_0 > 0.
BoundarySeries sqrt_series(const BoundarySeries& a);
BoundarySeries exp_series(const BoundarySeries& a);
// log(a); requires c_0 > 0.
BoundarySeries log_series(const BoundarySeries& a);
// a(lambda r)
BoundarySeries compose_scale(const BoundarySeries& a, double lambda);

}  // namespace cmcfol
