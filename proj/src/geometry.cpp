#include "cmcfol/geometry.hpp"

#include <cmath>

namespace cmcfol {

// ---- Chart -----------------------------------------------------------------

Chart Chart::box(int n, double lo_all, double hi_all) {
  Chart c;
  c.dim = n;
  c.lo.assign(n, lo_all);
  c.hi.assign(n, hi_all);
  return c;
}

Chart Chart::unbounded(int n) {
  double inf = std::numeric_limits<double>::infinity();
  return box(n, -inf, inf);
}

bool Chart::contains(std::span<const double> p) const {
  if (int(p.size()) != dim) return false;
  for (int i = 0; i < dim; ++i)
    if (!(p[i] > lo[i] && p[i] < hi[i])) return false;
  return true;
}

void Chart::require_inside(std::span<const double> p) const {
  if (int(p.size()) != dim)
    throw_usage("point dimension does not match chart dimension");
  if (!contains(p)) throw_domain("point outside chart domain");
}

// ---- ScalarField -----------------------------------------------------------

ScalarField::ScalarField(Expression e) {
  dim_ = e.n_vars();
  auto shared = std::make_shared<Expression>(std::move(e));
  value_ = [shared](std::span<const double> p) { return shared->eval(p); };
  jet_ = [shared](std::span<const double> p) { return shared->eval_jet2(p); };
  expr_ = *shared;
}

ScalarField ScalarField::analytic(int dim, ValueFn value, JetFn jet) {
  ScalarField f;
  f.dim_ = dim;
  f.value_ = std::move(value);
  f.jet_ = std::move(jet);
  return f;
}

ScalarField ScalarField::finite_difference(int dim, ValueFn value,
                                           double step) {
  ScalarField f;
  f.dim_ = dim;
  f.value_ = value;
  f.jet_ = [value, dim, step](std::span<const double> p) {
    Jet2 j(dim);
    Vec q(p.begin(), p.end());
    j.v = value(q);
    Vec h(dim);
    for (int i = 0; i < dim; ++i) h[i] = step * std::max(1.0, std::abs(p[i]));
    for (int i = 0; i < dim; ++i) {
      q[i] = p[i] + h[i];
      double fp = value(q);
      q[i] = p[i] - h[i];
      double fm = value(q);
      q[i] = p[i];
      j.g[i] = (fp - fm) / (2.0 * h[i]);
      j.hess_ref(i, i) = (fp - 2.0 * j.v + fm) / (h[i] * h[i]);
    }
    for (int i = 0; i < dim; ++i)
      for (int k = i + 1; k < dim; ++k) {
        q[i] = p[i] + h[i]; q[k] = p[k] + h[k];
        double fpp = value(q);
        q[k] = p[k] - h[k];
        double fpm = value(q);
        q[i] = p[i] - h[i];
        double fmm = value(q);
        q[k] = p[k] + h[k];
        double fmp = value(q);
        q[i] = p[i]; q[k] = p[k];
        j.hess_ref(i, k) = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[k]);
      }
    return j;
  };
  return f;
}

// ---- MetricField -----------------------------------------------------------

MetricField::MetricField(Chart chart, std::vector<ScalarField> entries,
                         MetricBackend backend, double fd_step)
    : chart_(std::move(chart)), entries_(std::move(entries)),
      backend_(backend), fd_step_(fd_step) {
  if (int(entries_.size()) != chart_.dim * chart_.dim)
    throw_usage("metric needs dim*dim entries");
  if (chart_.dim < 2) throw_usage("chart dimension must be >= 2");
  if (int(chart_.lo.size()) != chart_.dim || int(chart_.hi.size()) != chart_.dim)
    throw_usage("chart needs one bound pair per coordinate");
  for (int i = 0; i < chart_.dim; ++i)
    if (!(chart_.lo[i] < chart_.hi[i]))
      throw_usage("chart bounds must be ordered");
}

MetricField MetricField::from_expressions(Chart chart,
                                          const std::vector<std::string>& entries,
                                          MetricBackend backend,
                                          double fd_step) {
  int n = chart.dim;
  if (int(entries.size()) != n * n) throw_usage("metric needs dim*dim entries");
  std::vector<ScalarField> fields;
  fields.reserve(entries.size());
  for (const std::string& s : entries)
    fields.emplace_back(Expression::parse(s, n, chart.var_names));
  return MetricField(std::move(chart), std::move(fields), backend, fd_step);
}

MetricField MetricField::euclidean(Chart chart) {
  int n = chart.dim;
  std::vector<std::string> e(std::size_t(n) * n, "0");
  for (int i = 0; i < n; ++i) e[std::size_t(i) * n + i] = "1";
  return from_expressions(std::move(chart), e);
}

Mat MetricField::value_unchecked(std::span<const double> p) const {
  int n = dim();
  Mat g(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = entries_[std::size_t(i) * n + j](p);
  g.symmetrize();
  return g;
}

Mat MetricField::value(std::span<const double> p) const {
  chart_.require_inside(p);
  Mat g = value_unchecked(p);
  cholesky(g, "metric");  // positive definiteness gate
  return g;
}

Mat MetricField::inverse(std::span<const double> p) const {
  chart_.require_inside(p);
  return spd_inverse(value_unchecked(p), "metric");
}

Tensor3 MetricField::partials(std::span<const double> p) const {
  int n = dim();
  Tensor3 dg(n);
  if (backend_ == MetricBackend::Analytic) {
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) {
        Jet2 j = entries_[std::size_t(a) * n + b].jet(p);
        for (int c = 0; c < n; ++c) {
          dg(c, a, b) = j.g[c];
          dg(c, b, a) = j.g[c];
        }
      }
    return dg;
  }
  Vec q(p.begin(), p.end());
  for (int c = 0; c < n; ++c) {
    double h = fd_step_ * std::max(1.0, std::abs(p[c]));
    q[c] = p[c] + h;
    Mat gp = value_unchecked(q);
    q[c] = p[c] - h;
    Mat gm = value_unchecked(q);
    q[c] = p[c];
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) dg(c, a, b) = (gp(a, b) - gm(a, b)) / (2.0 * h);
  }
  return dg;
}

MetricField MetricField::with_fd_backend(double step) const {
  std::vector<ScalarField> wrapped;
  wrapped.reserve(entries_.size());
  for (const ScalarField& e : entries_) {
    auto fn = [e](std::span<const double> p) { return e(p); };
    wrapped.push_back(ScalarField::finite_difference(dim(), fn, step));
  }
  return MetricField(chart_, std::move(wrapped), MetricBackend::FiniteDifference,
                     step);
}

MetricField MetricField::conformally_scaled(const ScalarField& omega) const {
  int n = dim();
  bool analytic = backend_ == MetricBackend::Analytic && omega.expression();
  if (analytic)
    for (const ScalarField& e : entries_)
      if (!e.expression()) { analytic = false; break; }

  if (analytic) {
    std::vector<std::string> scaled;
    scaled.reserve(entries_.size());
    std::string factor = "exp(2*(" + omega.expression()->print() + "))";
    for (const ScalarField& e : entries_)
      scaled.push_back(factor + "*(" + e.expression()->print() + ")");
    return from_expressions(chart_, scaled, MetricBackend::Analytic, fd_step_);
  }

  std::vector<ScalarField> scaled;
  scaled.reserve(entries_.size());
  for (const ScalarField& e : entries_) {
    auto fn = [e, omega](std::span<const double> p) {
      return std::exp(2.0 * omega(p)) * e(p);
    };
    scaled.push_back(ScalarField::finite_difference(n, fn, fd_step_));
  }
  return MetricField(chart_, std::move(scaled), MetricBackend::FiniteDifference,
                     fd_step_);
}

// ---- differential operators -------------------------------------------------

Tensor3 christoffel(const MetricField& g, std::span<const double> p) {
  g.chart().require_inside(p);
  int n = g.dim();
  Mat ginv = spd_inverse(g.value_unchecked(p), "metric");
  Tensor3 dg = g.partials(p);
  Tensor3 gamma(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = b; c < n; ++c) {
        double s = 0.0;
        for (int d = 0; d < n; ++d)
          s += ginv(a, d) * (dg(b, d, c) + dg(c, d, b) - dg(d, b, c));
        gamma(a, b, c) = 0.5 * s;
        gamma(a, c, b) = gamma(a, b, c);
      }
  return gamma;
}

Mat covariant_hessian(const MetricField& g, const Jet2& fjet,
                      std::span<const double> p) {
  int n = g.dim();
  Tensor3 gamma = christoffel(g, p);
  Mat h(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      double s = fjet.hess(a, b);
      for (int c = 0; c < n; ++c) s -= gamma(c, a, b) * fjet.g[c];
      h(a, b) = s;
    }
  return h;
}

Mat covariant_hessian(const MetricField& g, const ScalarField& f,
                      std::span<const double> p) {
  return covariant_hessian(g, f.jet(p), p);
}

double laplacian(const MetricField& g, const ScalarField& f,
                 std::span<const double> p) {
  Mat hess = covariant_hessian(g, f, p);
  Mat ginv = g.inverse(p);
  double s = 0.0;
  for (int a = 0; a < g.dim(); ++a)
    for (int b = 0; b < g.dim(); ++b) s += ginv(a, b) * hess(a, b);
  return s;
}

double covector_norm(const MetricField& g, std::span<const double> u,
                     std::span<const double> p) {
  Mat ginv = g.inverse(p);
  double s = 0.0;
  for (int a = 0; a < g.dim(); ++a)
    for (int b = 0; b < g.dim(); ++b) s += ginv(a, b) * u[a] * u[b];
  if (s < 0.0) s = 0.0;  // roundoff guard; g^{-1} is positive definite
  return std::sqrt(s);
}

namespace {

// d_e Gamma^a_{bc}, exact for the analytic backend (needs second metric
// partials), by central differences of Gamma otherwise.
Tensor3 christoffel_partial(const MetricField& g, std::span<const double> p,
                            int e) {
  int n = g.dim();
  if (g.backend() == MetricBackend::Analytic) {
    Mat ginv = g.inverse(p);
    Tensor3 dg = g.partials(p);
    // second partials dd(e,c,a,b) = d_e d_c g_ab from entry Hessians
    std::vector<Jet2> jets(std::size_t(n) * n);
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b)
        jets[std::size_t(a) * n + b] = g.entries()[std::size_t(a) * n + b].jet(p);
    auto dd = [&](int c, int a, int b) {
      if (a > b) std::swap(a, b);
      return jets[std::size_t(a) * n + b].hess(e, c);
    };
    // d_e g^{ad} = -g^{am} (d_e g_mn) g^{nd}
    Mat dginv(n);
    for (int a = 0; a < n; ++a)
      for (int d = 0; d < n; ++d) {
        double s = 0.0;
        for (int m = 0; m < n; ++m)
          for (int q = 0; q < n; ++q) s += ginv(a, m) * dg(e, m, q) * ginv(q, d);
        dginv(a, d) = -s;
      }
    Tensor3 dgamma(n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          double s = 0.0;
          for (int d = 0; d < n; ++d) {
            s += dginv(a, d) * (dg(b, d, c) + dg(c, d, b) - dg(d, b, c));
            s += ginv(a, d) * (dd(b, d, c) + dd(c, d, b) - dd(d, b, c));
          }
          dgamma(a, b, c) = 0.5 * s;
        }
    return dgamma;
  }
  double h = g.fd_step() * std::max(1.0, std::abs(p[e]));
  Vec q(p.begin(), p.end());
  q[e] = p[e] + h;
  Tensor3 gp = christoffel(g, q);
  q[e] = p[e] - h;
  Tensor3 gm = christoffel(g, q);
  Tensor3 d(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) d(a, b, c) = (gp(a, b, c) - gm(a, b, c)) / (2.0 * h);
  return d;
}

}  // namespace

double scalar_curvature(const MetricField& g, std::span<const double> p) {
  g.chart().require_inside(p);
  int n = g.dim();
  Tensor3 gamma = christoffel(g, p);
  std::vector<Tensor3> dgamma;
  dgamma.reserve(n);
  for (int e = 0; e < n; ++e) dgamma.push_back(christoffel_partial(g, p, e));

  // Ric_bd = d_a Gamma^a_{bd} - d_d Gamma^a_{ba}
  //          + Gamma^a_{ae} Gamma^e_{bd} - Gamma^a_{de} Gamma^e_{ba}
  Mat ric(n);
  for (int b = 0; b < n; ++b)
    for (int d = 0; d < n; ++d) {
      double s = 0.0;
      for (int a = 0; a < n; ++a) {
        s += dgamma[a](a, b, d) - dgamma[d](a, b, a);
        for (int e = 0; e < n; ++e)
          s += gamma(a, a, e) * gamma(e, b, d) - gamma(a, d, e) * gamma(e, b, a);
      }
      ric(b, d) = s;
    }
  Mat ginv = g.inverse(p);
  double sc = 0.0;
  for (int b = 0; b < n; ++b)
    for (int d = 0; d < n; ++d) sc += ginv(b, d) * ric(b, d);
  return sc;
}

}  // namespace cmcfol
