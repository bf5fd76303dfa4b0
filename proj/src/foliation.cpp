#include "cmcfol/foliation.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "cmcfol/parallel.hpp"

namespace cmcfol {

namespace {

struct SliceData {
  Jet2 jet;        // coordinate jets of f
  Mat ginv;
  Vec grad_up;     // f^a
  Mat hess_cov;    // nabla_a nabla_b f
  double df2 = 0.0, df = 0.0;
  double lap = 0.0;   // Delta f
  double quad = 0.0;  // f^a f^b nabla_a nabla_b f
};

SliceData slice_data(const MetricField& g, const Jet2& jet,
                     std::span<const double> p, double eps_df) {
  SliceData d;
  d.jet = jet;
  d.ginv = g.inverse(p);
  d.grad_up = raise_index(d.ginv, d.jet.g);
  d.df2 = dot(d.grad_up, d.jet.g);
  d.df = std::sqrt(std::max(d.df2, 0.0));
  if (d.df < eps_df)
    throw_precondition("gradient below threshold: |df|_g = " +
                       std::to_string(d.df) + " < eps_df");
  d.hess_cov = covariant_hessian(g, d.jet, p);
  int n = g.dim();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      d.lap += d.ginv(a, b) * d.hess_cov(a, b);
      d.quad += d.grad_up[a] * d.grad_up[b] * d.hess_cov(a, b);
    }
  return d;
}

SliceData slice_data(const MetricField& g, const SliceFunction& f,
                     std::span<const double> p) {
  return slice_data(g, f.f.jet(p), p, f.eps_df);
}

double mean_curvature_value(const MetricField& g, const SliceData& d) {
  int n = g.dim();
  return (d.lap / d.df - d.quad / (d.df2 * d.df)) / (n - 1);
}

}  // namespace

Vec unit_normal(const MetricField& g, const SliceFunction& f,
                std::span<const double> p) {
  SliceData d = slice_data(g, f, p);
  Vec nu(d.jet.g);
  for (double& x : nu) x /= d.df;
  return nu;
}

Mat second_fundamental_form(const MetricField& g, const SliceFunction& f,
                            std::span<const double> p) {
  int n = g.dim();
  SliceData d = slice_data(g, f, p);

  // nabla_a nu_b with nu = df/|df|:
  //   nabla_a nabla_b f / |df| + f_b d_a(1/|df|),
  //   d_a(1/|df|) = -(f^c nabla_a nabla_c f)/|df|^3.
  Vec dinv(n, 0.0);
  for (int a = 0; a < n; ++a) {
    double s = 0.0;
    for (int c = 0; c < n; ++c) s += d.grad_up[c] * d.hess_cov(a, c);
    dinv[a] = -s / (d.df2 * d.df);
  }
  Mat grad_nu(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      grad_nu(a, b) = d.hess_cov(a, b) / d.df + d.jet.g[b] * dinv[a];

  Vec nu_lo(d.jet.g);
  for (double& x : nu_lo) x /= d.df;
  Vec nu_up = raise_index(d.ginv, nu_lo);

  // (delta_a^c - nu_a nu^c) nabla_c nu_b
  Mat h(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      double s = grad_nu(a, b);
      for (int c = 0; c < n; ++c) s -= nu_lo[a] * nu_up[c] * grad_nu(c, b);
      h(a, b) = s;
    }
  h.symmetrize();
  return h;
}

double mean_curvature_divergence_form(const MetricField& g,
                                      const SliceFunction& f,
                                      std::span<const double> p) {
  int n = g.dim();
  SliceData d = slice_data(g, f, p);
  Tensor3 gamma = christoffel(g, p);
  Tensor3 dg = g.partials(p);
  const Mat& ginv = d.ginv;

  // d_a g^{cd} = -g^{cm} (d_a g_mq) g^{qd}
  auto dginv = [&](int a, int c, int e) {
    double s = 0.0;
    for (int m = 0; m < n; ++m)
      for (int q = 0; q < n; ++q) s += ginv(c, m) * dg(a, m, q) * ginv(q, e);
    return -s;
  };

  // d_a |df|^2 = (d_a g^{cd}) f_c f_d + 2 g^{cd} f_{ca} f_d
  Vec ddf2(n, 0.0);
  for (int a = 0; a < n; ++a) {
    double s = 0.0;
    for (int c = 0; c < n; ++c)
      for (int e = 0; e < n; ++e) {
        s += dginv(a, c, e) * d.jet.g[c] * d.jet.g[e];
        s += 2.0 * ginv(c, e) * d.jet.hess(c, a) * d.jet.g[e];
      }
    ddf2[a] = s;
  }

  // nu^a = g^{ab} f_b / |df|;  (n-1) H = d_a nu^a + Gamma^a_{ac} nu^c
  double div = 0.0;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      div += dginv(a, a, b) * d.jet.g[b] / d.df;
      div += ginv(a, b) * d.jet.hess(a, b) / d.df;
      div += ginv(a, b) * d.jet.g[b] * (-0.5) * ddf2[a] / (d.df2 * d.df);
    }
    for (int c = 0; c < n; ++c) div += gamma(a, a, c) * d.grad_up[c] / d.df;
  }
  return div / (n - 1);
}

CurvatureSample mean_curvature(const MetricField& g, const SliceFunction& f,
                               std::span<const double> p) {
  SliceData d = slice_data(g, f, p);
  CurvatureSample s;
  s.point.assign(p.begin(), p.end());
  s.df_norm = d.df;
  s.nu = d.jet.g;
  for (double& x : s.nu) x /= d.df;
  s.H = mean_curvature_value(g, d);
#ifndef NDEBUG
  double hdiv = mean_curvature_divergence_form(g, f, p);
  assert(std::abs(hdiv - s.H) <= 1e-8 * (1.0 + std::abs(s.H)) &&
         "level-set and divergence mean-curvature forms disagree");
#endif
  return s;
}

double generic_cmc_residual(const MetricField& g, const SliceFunction& f,
                            int lambda, std::span<const double> p,
                            ResidualForm form, double h_field_fd_step) {
  if (lambda != 1 && lambda != -1) throw_usage("lambda must be +1 or -1");
  int n = g.dim();
  if (form == ResidualForm::Standard) {
    SliceData d = slice_data(g, f, p);
    double fval = d.jet.v;
    return (n - 1) * lambda * fval * d.df2 * d.df - (d.df2 * d.lap - d.quad);
  }
  // Rational form: the field is H itself; derivatives of H are taken by
  // finite differences and no |dH| division occurs.
  ScalarField hfield = ScalarField::finite_difference(
      n,
      [&g, &f](std::span<const double> q) {
        return mean_curvature(g, f, q).H;
      },
      h_field_fd_step);
  Jet2 hj = hfield.jet(p);
  Mat ginv = g.inverse(p);
  Vec hup = raise_index(ginv, hj.g);
  double dh2 = dot(hup, hj.g);
  Mat hess = covariant_hessian(g, hj, p);
  double lap = 0.0, quad = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      lap += ginv(a, b) * hess(a, b);
      quad += hup[a] * hup[b] * hess(a, b);
    }
  double dh = std::sqrt(std::max(dh2, 0.0));
  return (n - 1) * lambda * hj.v * dh2 * dh - (dh2 * lap - quad);
}

namespace {

// Solves f(origin + s dir) = t on [s_min, s_max]: bisection on a sign change
// of a scan grid, then Newton polish using the directional derivative.
std::optional<Vec> solve_on_ray(const MetricField& g, const SliceFunction& f,
                                const ProbeRay& ray, double t) {
  int n = g.dim();
  auto at = [&](double s) {
    Vec p(n);
    for (int i = 0; i < n; ++i) p[i] = ray.origin[i] + s * ray.direction[i];
    return p;
  };
  auto fval = [&](double s) { return f.f(at(s)) - t; };

  const int scan = 64;
  double s0 = ray.s_min, f0 = fval(s0);
  double a = s0, b = s0, fa = f0, fb = f0;
  bool found = false;
  for (int i = 1; i <= scan; ++i) {
    double s1 = ray.s_min + (ray.s_max - ray.s_min) * i / scan;
    double f1 = fval(s1);
    if (f0 == 0.0) { a = b = s0; fa = fb = 0.0; found = true; break; }
    if (f0 * f1 <= 0.0) { a = s0; b = s1; fa = f0; fb = f1; found = true; break; }
    s0 = s1;
    f0 = f1;
  }
  if (!found) return std::nullopt;

  for (int it = 0; it < 80 && b - a > 1e-14 * (1.0 + std::abs(b)); ++it) {
    double m = 0.5 * (a + b), fm = fval(m);
    if (fa * fm <= 0.0) { b = m; fb = fm; } else { a = m; fa = fm; }
  }
  double s = 0.5 * (a + b);
  // Newton polish
  for (int it = 0; it < 4; ++it) {
    Vec p = at(s);
    if (!g.chart().contains(p)) break;
    Jet2 j = f.f.jet(p);
    double der = dot(j.g, ray.direction);
    if (std::abs(der) < 1e-14) break;
    double step = (j.v - t) / der;
    s -= step;
    if (std::abs(step) < 1e-15) break;
  }
  Vec p = at(s);
  if (!g.chart().contains(p)) return std::nullopt;
  if (std::abs(f.f(p) - t) > 1e-9 * (1.0 + std::abs(t))) return std::nullopt;
  return p;
}

}  // namespace

CmcReport detect_cmc(const MetricField& g, const SliceFunction& f,
                     std::span<const double> leaf_values,
                     std::span<const ProbeRay> rays, double tol,
                     int min_samples) {
  CmcReport rep;
  rep.tol = tol;
  rep.leaves.resize(leaf_values.size());

  parallel_for(leaf_values.size(), [&](std::size_t li) {
    double t = leaf_values[li];
    LeafStat& st = rep.leaves[li];
    st.leaf_value = t;
    bool first = true;
    double sum = 0.0;
    for (const ProbeRay& ray : rays) {
      auto p = solve_on_ray(g, f, ray, t);
      if (!p) continue;
      double h = mean_curvature(g, f, *p).H;
      if (first) {
        st.h_min = st.h_max = h;
        first = false;
      } else {
        st.h_min = std::min(st.h_min, h);
        st.h_max = std::max(st.h_max, h);
      }
      sum += h;
      ++st.samples;
    }
    if (st.samples > 0) {
      st.h_mean = sum / st.samples;
      st.spread = st.h_max - st.h_min;
    }
  });

  rep.is_cmc = true;
  for (const LeafStat& st : rep.leaves) {
    if (st.samples == 0)
      throw_precondition("leaf value " + std::to_string(st.leaf_value) +
                         " not attained along any probe ray");
    if (st.samples < min_samples) rep.insufficient_samples = true;
    double leaf_tol = tol > 0.0 ? tol : 1e-6 * (1.0 + std::abs(st.h_mean));
    if (st.spread > leaf_tol) rep.is_cmc = false;
  }
  return rep;
}

NormalizeResult normalize_constant_H(const MetricField& g,
                                     const SliceFunction& f,
                                     std::span<const double> arc_params,
                                     std::span<const Vec> gamma_points,
                                     double h_constancy_tol) {
  if (arc_params.size() != gamma_points.size() || arc_params.size() < 2)
    throw_usage("gamma needs matching arc parameters and at least two points");

  // Constant-H precondition: sample H along gamma.
  double hmin = 0.0, hmax = 0.0;
  for (std::size_t i = 0; i < gamma_points.size(); ++i) {
    double h = mean_curvature(g, f, gamma_points[i]).H;
    if (i == 0) { hmin = hmax = h; }
    hmin = std::min(hmin, h);
    hmax = std::max(hmax, h);
  }
  if (hmax - hmin > h_constancy_tol * (1.0 + std::abs(hmax)))
    throw_precondition("mean curvature is not constant along gamma");

  // |d(F o f o gamma)/ds| = 1 with F(f(gamma(s0))) = 0 forces
  // F(f(gamma(s))) = +-(s - s0); the sign follows the orientation of f
  // along gamma.
  NormalizeResult res;
  res.table.reserve(arc_params.size());
  double f_prev = f.f(gamma_points[0]);
  double sign = 0.0;
  for (std::size_t i = 0; i < gamma_points.size(); ++i) {
    double fi = f.f(gamma_points[i]);
    if (i > 0) {
      double ds = arc_params[i] - arc_params[i - 1];
      if (!(ds > 0.0)) throw_usage("arc parameters must be strictly increasing");
      double slope = (fi - f_prev) / ds;
      if (std::abs(slope) < 1e-10)
        throw_precondition("curve tangent to leaf: |d(f o gamma)| ~ 0");
      double s = slope > 0 ? 1.0 : -1.0;
      if (sign == 0.0) sign = s;
      else if (s != sign)
        throw_precondition("curve is not transverse: f o gamma not monotone");
    }
    f_prev = fi;
    res.table.emplace_back(fi, 0.0);
  }
  for (std::size_t i = 0; i < arc_params.size(); ++i)
    res.table[i].second = sign * (arc_params[i] - arc_params[0]);
  return res;
}

double linearize_mean_curvature(const MetricField& g, const SliceFunction& f,
                                const ScalarField& u, std::span<const double> p) {
  int n = g.dim();
  SliceData d = slice_data(g, f, p);
  Jet2 uj = u.jet(p);
  Mat hess_u = covariant_hessian(g, uj, p);
  Vec u_up = raise_index(d.ginv, uj.g);

  double lap_u = 0.0;
  double u_Hf_f = 0.0;   // u^a f^b nabla_a nabla_b f
  double f_Hu_f = 0.0;   // f^a f^b nabla_a nabla_b u
  double du_df = dot(u_up, d.jet.g);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      lap_u += d.ginv(a, b) * hess_u(a, b);
      u_Hf_f += u_up[a] * d.grad_up[b] * d.hess_cov(a, b);
      f_Hu_f += d.grad_up[a] * d.grad_up[b] * hess_u(a, b);
    }

  // Exact expansion of
  //   div( grad u / |df| - (<du,df>/|df|^3) grad f ),
  // using d_a(1/|df|) = -(f^b nabla_a nabla_b f)/|df|^3.
  double df3 = d.df2 * d.df;
  double df5 = d.df2 * df3;
  double val = lap_u / d.df
             - 2.0 * u_Hf_f / df3
             - f_Hu_f / df3
             + 3.0 * du_df * d.quad / df5
             - du_df * d.lap / df3;
  return val / (n - 1);
}

}  // namespace cmcfol
