#include "cmcfol/series.hpp"

#include <algorithm>
#include <cmath>

namespace cmcfol {

// ---- BoundaryChart -----------------------------------------------------------

std::shared_ptr<const BoundaryChart> BoundaryChart::homogeneous() {
  static auto chart = std::make_shared<BoundaryChart>();
  return chart;
}

std::vector<double> BoundaryChart::coords(int flat) const {
  std::vector<double> x(bdim());
  for (int d = bdim() - 1; d >= 0; --d) {
    int idx = flat % shape[d];
    flat /= shape[d];
    x[d] = lo[d] + spacing(d) * idx;
  }
  return x;
}

int BoundaryChart::flat_offset(int flat, int d, int delta) const {
  // decompose, shift direction d, recompose
  std::vector<int> idx(bdim());
  int rest = flat;
  for (int k = bdim() - 1; k >= 0; --k) {
    idx[k] = rest % shape[k];
    rest /= shape[k];
  }
  int i = idx[d] + delta;
  if (stencil == Stencil::Periodic) {
    i %= shape[d];
    if (i < 0) i += shape[d];
  } else {
    i = std::clamp(i, 0, shape[d] - 1);
  }
  idx[d] = i;
  int out = 0;
  for (int k = 0; k < bdim(); ++k) out = out * shape[k] + idx[k];
  return out;
}

// ---- BoundaryField -----------------------------------------------------------

BoundaryField BoundaryField::sampled(
    std::shared_ptr<const BoundaryChart> chart,
    const std::function<double(std::span<const double>)>& fn) {
  BoundaryField f(chart);
  for (int i = 0; i < f.nodes(); ++i) {
    auto x = chart->coords(i);
    f[i] = fn(x);
  }
  return f;
}

BoundaryField BoundaryField::derivative(int dir) const {
  BoundaryField out(chart_);
  if (chart_->bdim() == 0) return out;  // homogeneous: derivative vanishes
  double h = chart_->spacing(dir);
  for (int i = 0; i < nodes(); ++i) {
    int ip = chart_->flat_offset(i, dir, +1);
    int im = chart_->flat_offset(i, dir, -1);
    if (chart_->stencil == BoundaryChart::Stencil::Clamped && (ip == i || im == i)) {
      // one-sided second-order stencil at a clamped edge
      int i1, i2;
      double sign;
      if (im == i) { i1 = chart_->flat_offset(i, dir, +1); i2 = chart_->flat_offset(i, dir, +2); sign = 1.0; }
      else { i1 = chart_->flat_offset(i, dir, -1); i2 = chart_->flat_offset(i, dir, -2); sign = -1.0; }
      out[i] = sign * (-1.5 * v_[i] + 2.0 * v_[i1] - 0.5 * v_[i2]) / h;
    } else {
      out[i] = (v_[ip] - v_[im]) / (2.0 * h);
    }
  }
  return out;
}

BoundaryField BoundaryField::apply(const std::function<double(double)>& fn) const {
  BoundaryField out(chart_);
  for (int i = 0; i < nodes(); ++i) out[i] = fn(v_[i]);
  return out;
}

double BoundaryField::max_abs() const {
  double m = 0.0;
  for (double x : v_) m = std::max(m, std::abs(x));
  return m;
}

double BoundaryField::min_value() const {
  double m = std::numeric_limits<double>::infinity();
  for (double x : v_) m = std::min(m, x);
  return m;
}

namespace {
void check_same_chart(const BoundaryField& a, const BoundaryField& b) {
  if (a.chart() != b.chart())
    throw_usage("boundary fields live on different charts");
}
}  // namespace

BoundaryField operator+(const BoundaryField& a, const BoundaryField& b) {
  check_same_chart(a, b);
  BoundaryField out(a.chart());
  for (int i = 0; i < a.nodes(); ++i) out[i] = a[i] + b[i];
  return out;
}

BoundaryField operator-(const BoundaryField& a, const BoundaryField& b) {
  check_same_chart(a, b);
  BoundaryField out(a.chart());
  for (int i = 0; i < a.nodes(); ++i) out[i] = a[i] - b[i];
  return out;
}

BoundaryField operator*(const BoundaryField& a, const BoundaryField& b) {
  check_same_chart(a, b);
  BoundaryField out(a.chart());
  for (int i = 0; i < a.nodes(); ++i) out[i] = a[i] * b[i];
  return out;
}

BoundaryField operator*(double s, const BoundaryField& a) {
  BoundaryField out(a.chart());
  for (int i = 0; i < a.nodes(); ++i) out[i] = s * a[i];
  return out;
}

// ---- BoundarySeries ----------------------------------------------------------

BoundarySeries::BoundarySeries(std::shared_ptr<const BoundaryChart> chart,
                               int order)
    : chart_(std::move(chart)), ord_(order), exact_(true) {
  if (order < 0) throw_usage("series order must be >= 0");
  c_.assign(order + 1, BoundaryField(chart_));
}

BoundarySeries BoundarySeries::constant(
    std::shared_ptr<const BoundaryChart> chart, double c0, int order) {
  BoundarySeries s(chart, order);
  s.c_[0] = BoundaryField(s.chart_, c0);
  return s;
}

BoundarySeries BoundarySeries::monomial(const BoundaryField& c, int power,
                                        int order) {
  if (power > order) throw_usage("monomial power exceeds series order");
  BoundarySeries s(c.chart(), order);
  s.c_[power] = c;
  return s;
}

const BoundaryField& BoundarySeries::coeff(int j) const {
  if (j < 0 || j > ord_)
    throw_usage("series coefficient " + std::to_string(j) +
                " beyond trusted order " + std::to_string(ord_));
  return c_[j];
}

BoundaryField& BoundarySeries::coeff_ref(int j) { return c_[j]; }

BoundarySeries BoundarySeries::truncated(int order) const {
  BoundarySeries out(chart_, order);
  for (int j = 0; j <= std::min(order, storage()); ++j) out.c_[j] = c_[j];
  bool cut_nonzero = false;
  for (int j = order + 1; j <= storage(); ++j)
    if (c_[j].max_abs() != 0.0) cut_nonzero = true;
  out.exact_ = exact_ && !cut_nonzero;
  out.ord_ = out.exact_ ? order : std::min(order, ord_);
  return out;
}

BoundarySeries BoundarySeries::derivative_r() const {
  BoundarySeries out(chart_, storage());
  for (int j = 0; j + 1 <= storage(); ++j) out.c_[j] = double(j + 1) * c_[j + 1];
  out.c_[storage()] = BoundaryField(chart_);
  out.exact_ = exact_;
  out.ord_ = exact_ ? storage() : ord_ - 1;
  if (out.ord_ < 0) throw_usage("cannot differentiate an order-0 inexact series");
  return out;
}

BoundarySeries BoundarySeries::shifted_up(int power) const {
  BoundarySeries out(chart_, storage());
  for (int j = storage(); j >= power; --j) out.c_[j] = c_[j - power];
  for (int j = 0; j < power; ++j) out.c_[j] = BoundaryField(chart_);
  // Shifting may push trusted (or nonzero exact) coefficients past storage.
  bool overflow = false;
  for (int j = storage() - power + 1; j <= storage(); ++j)
    if (j >= 0 && j <= ord_ && c_[j].max_abs() != 0.0) overflow = true;
  out.exact_ = exact_ && !overflow;
  out.ord_ = out.exact_ ? storage() : std::min(storage(), ord_ + power);
  return out;
}

BoundarySeries BoundarySeries::tangential_derivative(int dir) const {
  BoundarySeries out(chart_, storage());
  for (int j = 0; j <= storage(); ++j) out.c_[j] = c_[j].derivative(dir);
  out.exact_ = exact_;
  out.ord_ = ord_;
  return out;
}

double BoundarySeries::eval(double r, int node) const {
  double acc = 0.0;
  for (int j = ord_; j >= 0; --j) acc = acc * r + c_[j][node];
  return acc;
}

namespace {
void check_same(const BoundarySeries& a, const BoundarySeries& b) {
  if (a.chart() != b.chart())
    throw_usage("series live on different boundary charts");
  if (a.storage() != b.storage())
    throw_usage("series order mismatch: " + std::to_string(a.storage()) +
                " vs " + std::to_string(b.storage()));
}
}  // namespace

BoundarySeries operator+(const BoundarySeries& a, const BoundarySeries& b) {
  check_same(a, b);
  BoundarySeries out(a.chart_, a.storage());
  for (int j = 0; j <= a.storage(); ++j) out.c_[j] = a.c_[j] + b.c_[j];
  out.exact_ = a.exact_ && b.exact_;
  out.ord_ = std::min(a.ord_, b.ord_);
  if (out.exact_) out.ord_ = a.storage();
  return out;
}

BoundarySeries operator-(const BoundarySeries& a, const BoundarySeries& b) {
  check_same(a, b);
  BoundarySeries out(a.chart_, a.storage());
  for (int j = 0; j <= a.storage(); ++j) out.c_[j] = a.c_[j] - b.c_[j];
  out.exact_ = a.exact_ && b.exact_;
  out.ord_ = std::min(a.ord_, b.ord_);
  if (out.exact_) out.ord_ = a.storage();
  return out;
}

BoundarySeries operator*(const BoundarySeries& a, const BoundarySeries& b) {
  check_same(a, b);
  int N = a.storage();
  BoundarySeries out(a.chart_, N);
  for (int k = 0; k <= N; ++k) {
    BoundaryField acc(a.chart_);
    for (int j = 0; j <= k; ++j) acc = acc + a.c_[j] * b.c_[k - j];
    out.c_[k] = acc;
  }
  // Exactness survives only when no nonzero tail was cut off.
  bool tail = false;
  if (a.exact_ && b.exact_) {
    int deg_a = -1, deg_b = -1;
    for (int j = 0; j <= N; ++j) {
      if (a.c_[j].max_abs() != 0.0) deg_a = j;
      if (b.c_[j].max_abs() != 0.0) deg_b = j;
    }
    tail = (deg_a >= 0 && deg_b >= 0 && deg_a + deg_b > N);
    out.exact_ = !tail;
  } else {
    out.exact_ = false;
  }
  out.ord_ = out.exact_ ? N : std::min(a.ord_, b.ord_);
  return out;
}

BoundarySeries operator*(double s, const BoundarySeries& a) {
  BoundarySeries out(a.chart_, a.storage());
  for (int j = 0; j <= a.storage(); ++j) out.c_[j] = s * a.c_[j];
  out.exact_ = a.exact_;
  out.ord_ = a.ord_;
  return out;
}

BoundarySeries recip(const BoundarySeries& a) {
  double amin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < a.c_[0].nodes(); ++i)
    amin = std::min(amin, std::abs(a.c_[0][i]));
  if (!(amin > 1e-300))
    throw_domain("series reciprocal needs constant coefficient bounded away from 0");
  int N = a.storage();
  BoundarySeries out(a.chart_, N);
  BoundaryField inv0 = a.c_[0].apply([](double x) { return 1.0 / x; });
  out.c_[0] = inv0;
  for (int k = 1; k <= N; ++k) {
    BoundaryField acc(a.chart_);
    for (int j = 1; j <= k; ++j) acc = acc + a.c_[j] * out.c_[k - j];
    out.c_[k] = -1.0 * (inv0 * acc);
  }
  out.exact_ = false;
  out.ord_ = std::min(a.ord_, N);
  return out;
}

BoundarySeries sqrt_series(const BoundarySeries& a) {
  if (!(a.c_[0].min_value() > 0.0))
    throw_domain("series sqrt needs positive constant coefficient");
  int N = a.storage();
  BoundarySeries out(a.chart_, N);
  BoundaryField s0 = a.c_[0].apply([](double x) { return std::sqrt(x); });
  out.c_[0] = s0;
  BoundaryField half_inv_s0 = s0.apply([](double x) { return 0.5 / x; });
  for (int k = 1; k <= N; ++k) {
    BoundaryField acc(a.chart_);
    for (int j = 1; j < k; ++j) acc = acc + out.c_[j] * out.c_[k - j];
    out.c_[k] = half_inv_s0 * (a.c_[k] - acc);
  }
  out.exact_ = false;
  out.ord_ = std::min(a.ord_, N);
  return out;
}

BoundarySeries exp_series(const BoundarySeries& a) {
  int N = a.storage();
  BoundarySeries out(a.chart_, N);
  out.c_[0] = a.c_[0].apply([](double x) { return std::exp(x); });
  // e' = a' e  =>  k e_k = sum_{j=1..k} j a_j e_{k-j}
  for (int k = 1; k <= N; ++k) {
    BoundaryField acc(a.chart_);
    for (int j = 1; j <= k; ++j) acc = acc + double(j) * (a.c_[j] * out.c_[k - j]);
    out.c_[k] = (1.0 / k) * acc;
  }
  out.exact_ = false;
  out.ord_ = std::min(a.ord_, N);
  return out;
}

BoundarySeries log_series(const BoundarySeries& a) {
  if (!(a.c_[0].min_value() > 0.0))
    throw_domain("series log needs positive constant coefficient");
  int N = a.storage();
  BoundarySeries out(a.chart_, N);
  out.c_[0] = a.c_[0].apply([](double x) { return std::log(x); });
  BoundaryField inv0 = a.c_[0].apply([](double x) { return 1.0 / x; });
  // a l' = a'  =>  k a_0 l_k = k a_k - sum_{j=1..k-1} j l_j a_{k-j}
  for (int k = 1; k <= N; ++k) {
    BoundaryField acc(a.chart_);
    for (int j = 1; j < k; ++j) acc = acc + double(j) * (out.c_[j] * a.c_[k - j]);
    out.c_[k] = (1.0 / k) * (inv0 * (double(k) * a.c_[k] - acc));
  }
  out.exact_ = false;
  out.ord_ = std::min(a.ord_, N);
  return out;
}

BoundarySeries compose_scale(const BoundarySeries& a, double lambda) {
  BoundarySeries out(a.chart_, a.storage());
  double p = 1.0;
  for (int j = 0; j <= a.storage(); ++j) {
    out.c_[j] = p * a.c_[j];
    p *= lambda;
  }
  out.exact_ = a.exact_;
  out.ord_ = a.ord_;
  return out;
}

}  // namespace cmcfol
