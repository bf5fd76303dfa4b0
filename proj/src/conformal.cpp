#include "cmcfol/conformal.hpp"

#include <algorithm>
#include <cmath>

#include "cmcfol/parallel.hpp"

namespace cmcfol {

double transform_mean_curvature(double H, const ScalarField& omega,
                                std::span<const double> nu,
                                const MetricField& g, std::span<const double> p) {
  double norm = covector_norm(g, nu, p);
  if (std::abs(norm - 1.0) > 1e-8)
    throw_precondition("conormal is not unit with respect to g (|nu|_g = " +
                       std::to_string(norm) + ")");
  Jet2 wj = omega.jet(p);
  Mat ginv = g.inverse(p);
  Vec nu_up = raise_index(ginv, nu);
  double normal_deriv = dot(nu_up, wj.g);
  return std::exp(-wj.v) * (H + normal_deriv);
}

namespace {

// Adaptive RK4 (step doubling) for y' = rhs(t, y), from a to b.
using Rhs = std::function<void(double, const Vec&, Vec&)>;

Vec rk4_step(const Rhs& rhs, double t, const Vec& y, double h) {
  std::size_t n = y.size();
  Vec k1(n), k2(n), k3(n), k4(n), tmp(n), out(n);
  rhs(t, y, k1);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
  rhs(t + 0.5 * h, tmp, k2);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
  rhs(t + 0.5 * h, tmp, k3);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
  rhs(t + h, tmp, k4);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

void advance(const Rhs& rhs, double& t, Vec& y, double target,
             const StepControl& ctl) {
  double dir = target >= t ? 1.0 : -1.0;
  double h = std::min(ctl.h_init, ctl.h_max) * dir;
  while (dir * (target - t) > 1e-15 * (1.0 + std::abs(target))) {
    if (dir * h > dir * (target - t)) h = target - t;
    Vec full = rk4_step(rhs, t, y, h);
    Vec half = rk4_step(rhs, t, y, 0.5 * h);
    half = rk4_step(rhs, t + 0.5 * h, half, 0.5 * h);
    double ratio = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      double err = std::abs(full[i] - half[i]);
      double scale = ctl.rel_tol * (1.0 + std::abs(half[i]));
      ratio = std::max(ratio, err / scale);
    }
    if (ratio <= 1.0) {
      y = half;
      t += h;
      double grow = ratio > 1e-12 ? 0.9 * std::pow(ratio, -0.2) : 2.0;
      h *= std::clamp(grow, 0.25, 2.0);
      if (std::abs(h) > ctl.h_max) h = ctl.h_max * dir;
    } else {
      h *= std::clamp(0.9 * std::pow(ratio, -0.25), 0.1, 0.9);
    }
    if (std::abs(h) < ctl.h_min)
      throw_domain("step-size underflow while tracing flow line");
  }
  t = target;
}

struct FlowGeometry {
  Vec velocity;   // grad f / |grad f|^2
  double df_norm; // |df|_g
  double h_over_df;  // H / |df|, lazily not computed unless asked
};

FlowGeometry flow_geometry(const MetricField& g, const SliceFunction& f,
                           std::span<const double> x, bool with_curvature) {
  if (!g.chart().contains(x)) throw_domain("flow line left the chart domain");
  FlowGeometry out;
  if (with_curvature) {
    CurvatureSample c = mean_curvature(g, f, x);
    out.df_norm = c.df_norm;
    out.h_over_df = c.H / c.df_norm;
    Jet2 j = f.f.jet(x);
    Mat ginv = g.inverse(x);
    Vec up = raise_index(ginv, j.g);
    double df2 = dot(up, j.g);
    out.velocity.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out.velocity[i] = up[i] / df2;
    return out;
  }
  Jet2 j = f.f.jet(x);
  Mat ginv = g.inverse(x);
  Vec up = raise_index(ginv, j.g);
  double df2 = dot(up, j.g);
  out.df_norm = std::sqrt(std::max(df2, 0.0));
  if (out.df_norm < f.eps_df)
    throw_precondition("gradient collapse along flow line");
  out.h_over_df = 0.0;
  out.velocity.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out.velocity[i] = up[i] / df2;
  return out;
}

}  // namespace

FlowLine integrate_flow_line(const MetricField& g, const SliceFunction& f,
                             std::span<const double> seed,
                             std::span<const double> sample_ts,
                             const StepControl& ctl,
                             const std::function<double(std::span<const double>)>&
                                 integrand) {
  if (sample_ts.empty()) throw_usage("flow line needs at least one sample t");
  int n = g.dim();
  FlowLine line;
  line.seed.assign(seed.begin(), seed.end());

  double t_start = f.f(line.seed);
  if (std::abs(t_start - sample_ts[0]) > 1e-8 * (1.0 + std::abs(sample_ts[0])))
    throw_precondition("seed does not lie on the starting leaf");
  // The seed itself must have a usable gradient.
  (void)flow_geometry(g, f, line.seed, false);

  Rhs rhs = [&](double, const Vec& y, Vec& dy) {
    std::span<const double> x(y.data(), n);
    FlowGeometry geo = flow_geometry(g, f, x, false);
    dy.assign(y.size(), 0.0);
    for (int i = 0; i < n; ++i) dy[i] = geo.velocity[i];
    if (integrand) dy[n] = integrand(x);
  };

  Vec y(n + 1, 0.0);
  for (int i = 0; i < n; ++i) y[i] = line.seed[i];
  double t = sample_ts[0];
  for (double target : sample_ts) {
    if (target != t) advance(rhs, t, y, target, ctl);
    FlowNode node;
    node.t = target;
    node.x.assign(y.begin(), y.begin() + n);
    node.integral = y[n];
    Jet2 j = f.f.jet(node.x);
    Mat ginv = g.inverse(node.x);
    node.df_norm = std::sqrt(std::max(dot(raise_index(ginv, j.g), j.g), 0.0));
    if (std::abs(j.v - target) > 1e-8 * (1.0 + std::abs(target)))
      throw_domain("flow line lost the leaf parameterization");
    line.nodes.push_back(std::move(node));
  }
  return line;
}

// ---- ConformalFactor ---------------------------------------------------------

double ConformalFactor::Table::eval(int seed, double t) const {
  const auto& v = value[seed];
  const auto& d = deriv[seed];
  const auto& ts = tgrid;
  if (t <= ts.front()) return v.front() + d.front() * (t - ts.front());
  if (t >= ts.back()) return v.back() + d.back() * (t - ts.back());
  auto it = std::upper_bound(ts.begin(), ts.end(), t);
  std::size_t i1 = std::size_t(it - ts.begin());
  std::size_t i0 = i1 - 1;
  double h = ts[i1] - ts[i0];
  double u = (t - ts[i0]) / h;
  double u2 = u * u, u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * v[i0] + (u3 - 2 * u2 + u) * h * d[i0] +
         (-2 * u3 + 3 * u2) * v[i1] + (u3 - u2) * h * d[i1];
}

double ConformalFactor::omega(double t, int seed_index) const {
  double w = additive.eval(seed_index, t);
  if (wrap_integral) {
    double arg = C - wrap_integral->eval(seed_index, t);
    if (!(arg > 0.0))
      throw_domain("conformal factor log argument is non-positive (C too small)");
    w -= std::log(arg);
  }
  return w;
}

double ConformalFactor::omega_interp(double t, double seed_coord) const {
  if (seeds.size() == 1) return omega(t, 0);
  double c = std::clamp(seed_coord, 0.0, double(seeds.size() - 1));
  int i0 = int(std::floor(c));
  if (i0 >= int(seeds.size()) - 1) i0 = int(seeds.size()) - 2;
  double u = c - i0;
  return (1.0 - u) * omega(t, i0) + u * omega(t, i0 + 1);
}

bool ConformalFactor::leaf_constant(double tol) const {
  if (seeds.size() <= 1) return true;
  for (double t : additive.tgrid) {
    double lo = 0.0, hi = 0.0;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      double w = omega(t, int(s));
      if (s == 0) lo = hi = w;
      lo = std::min(lo, w);
      hi = std::max(hi, w);
    }
    if (hi - lo > tol * (1.0 + std::abs(hi))) return false;
  }
  return true;
}

double ConformalFactor::omega_at_point(const MetricField& g,
                                       const SliceFunction& f,
                                       std::span<const double> p) const {
  double t = f.f(p);
  if (leaf_constant()) return omega(t, 0);

  // Trace back to the reference leaf to identify the flow line through p,
  // then locate the landing point along the seed polyline.
  Vec ts = {t, t0};
  FlowLine back = integrate_flow_line(g, f, p, ts);
  const Vec& base = back.nodes.back().x;

  double best = 0.0, best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s + 1 < seeds.size(); ++s) {
    const Vec& a = seeds[s];
    const Vec& b = seeds[s + 1];
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      num += (base[i] - a[i]) * (b[i] - a[i]);
      den += (b[i] - a[i]) * (b[i] - a[i]);
    }
    double u = den > 0.0 ? std::clamp(num / den, 0.0, 1.0) : 0.0;
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      double q = base[i] - (a[i] + u * (b[i] - a[i]));
      d2 += q * q;
    }
    if (d2 < best_d2) {
      best_d2 = d2;
      best = double(s) + u;
    }
  }
  return omega_interp(t, best);
}

MetricField ConformalFactor::rescaled_metric(const MetricField& g,
                                             const SliceFunction& f,
                                             double fd_step) const {
  ConformalFactor self = *this;
  MetricField base = g;
  SliceFunction slice = f;
  bool lc = leaf_constant();
  auto omega_fn = [self, base, slice, lc](std::span<const double> p) {
    if (lc) return self.omega(slice.f(p), 0);
    return self.omega_at_point(base, slice, p);
  };
  ScalarField w = ScalarField::finite_difference(g.dim(), omega_fn, fd_step);
  return g.conformally_scaled(w).with_fd_backend(fd_step);
}

// ---- factor constructions ----------------------------------------------------

namespace {

constexpr int kPadNodes = 2;

// Nominal sample grid plus kPadNodes padding nodes per side. Padding keeps
// finite-difference stencils at the collar edge inside accurate table data;
// nodes whose flow-line integration fails (chart edge) are dropped again.
Vec collar_tgrid(const CollarSpec& collar) {
  if (!(collar.t_min <= collar.t0 && collar.t0 <= collar.t_max))
    throw_usage("collar reference leaf must lie inside [t_min, t_max]");
  if (collar.t_samples < 3) throw_usage("collar needs at least 3 t samples");
  double dt = (collar.t_max - collar.t_min) / double(collar.t_samples - 1);
  Vec ts;
  for (int i = kPadNodes; i >= 1; --i) ts.push_back(collar.t_min - i * dt);
  for (int i = 0; i < collar.t_samples; ++i)
    ts.push_back(collar.t_min + dt * i);
  for (int i = 1; i <= kPadNodes; ++i) ts.push_back(collar.t_max + i * dt);
  return ts;
}

// Builds the per-seed tables of the coupled integrals along flow lines:
//   I_min(t)  = int H/|df| ds            (minimalizing exponent is -I_min)
//   I_wrap(t) = int h e^{-I_min}/|df| ds (prescription integral)
// Both anchored to 0 on the reference leaf.
ConformalFactor build_factor(
    const MetricField& g, const SliceFunction& f, const CollarSpec& collar,
    const std::function<double(std::span<const double>)>* target) {
  if (collar.seeds.empty()) throw_usage("collar needs at least one seed");
  ConformalFactor fac;
  fac.t0 = collar.t0;
  fac.t_lo = collar.t_min;
  fac.t_hi = collar.t_max;
  fac.seeds = collar.seeds;
  fac.additive.tgrid = collar_tgrid(collar);
  std::size_t ns = collar.seeds.size(), nt = fac.additive.tgrid.size();
  fac.additive.value.assign(ns, std::vector<double>(nt, 0.0));
  fac.additive.deriv = fac.additive.value;
  if (target) {
    fac.wrap_integral = fac.additive;
    fac.wrap_integral->tgrid = fac.additive.tgrid;
  }
  std::vector<std::vector<char>> node_ok(ns, std::vector<char>(nt, 1));

  int n = g.dim();
  double pad_eps = 1e-12 * (1.0 + std::abs(collar.t_max) + std::abs(collar.t_min));
  auto is_padding = [&](double t) {
    return t < collar.t_min - pad_eps || t > collar.t_max + pad_eps;
  };

  parallel_for(ns, [&](std::size_t si) {
    const Vec& seed = collar.seeds[si];
    if (std::abs(f.f(seed) - collar.t0) > 1e-8 * (1.0 + std::abs(collar.t0)))
      throw_precondition("seed does not lie on the reference leaf");

    // state y = (x, I_min, I_wrap)
    Rhs rhs = [&](double, const Vec& y, Vec& dy) {
      std::span<const double> x(y.data(), n);
      FlowGeometry geo = flow_geometry(g, f, x, true);
      dy.assign(y.size(), 0.0);
      for (int i = 0; i < n; ++i) dy[i] = geo.velocity[i];
      dy[n] = geo.h_over_df;
      if (target)
        dy[n + 1] = (*target)(x) * std::exp(-y[n]) / geo.df_norm;
    };

    auto record = [&](std::size_t node, const Vec& y) {
      std::span<const double> x(y.data(), n);
      FlowGeometry geo = flow_geometry(g, f, x, true);
      fac.additive.value[si][node] = -y[n];
      fac.additive.deriv[si][node] = -geo.h_over_df;
      if (target) {
        fac.wrap_integral->value[si][node] = y[n + 1];
        fac.wrap_integral->deriv[si][node] =
            (*target)(x) * std::exp(-y[n]) / geo.df_norm;
      }
    };

    for (int dir = 0; dir < 2; ++dir) {
      std::vector<std::size_t> order;
      for (std::size_t i = 0; i < nt; ++i) {
        double t = fac.additive.tgrid[i];
        if (dir == 0 ? t >= collar.t0 : t < collar.t0) order.push_back(i);
      }
      std::sort(order.begin(), order.end(), [&](auto a, auto b) {
        double ta = fac.additive.tgrid[a], tb = fac.additive.tgrid[b];
        return dir == 0 ? ta < tb : ta > tb;
      });
      if (order.empty()) continue;

      Vec y(std::size_t(n) + (target ? 2 : 1), 0.0);
      for (int i = 0; i < n; ++i) y[i] = seed[i];
      double t = collar.t0;
      for (std::size_t k = 0; k < order.size(); ++k) {
        std::size_t idx = order[k];
        double tt = fac.additive.tgrid[idx];
        try {
          if (tt != t) advance(rhs, t, y, tt, collar.step);
          record(idx, y);
        } catch (const Error&) {
          // padding nodes are best effort: flow lines may leave the chart
          if (!is_padding(tt)) throw;
          for (std::size_t k2 = k; k2 < order.size(); ++k2)
            node_ok[si][order[k2]] = 0;
          break;
        }
      }
    }
  });

  // Drop padding nodes that failed for any seed.
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < nt; ++i) {
    bool ok = true;
    for (std::size_t si = 0; si < ns; ++si) ok = ok && node_ok[si][i];
    if (ok) keep.push_back(i);
  }
  if (keep.size() != nt) {
    auto filter_table = [&](ConformalFactor::Table& tab) {
      Vec tg;
      std::vector<std::vector<double>> val(ns), der(ns);
      for (std::size_t i : keep) tg.push_back(tab.tgrid[i]);
      for (std::size_t si = 0; si < ns; ++si)
        for (std::size_t i : keep) {
          val[si].push_back(tab.value[si][i]);
          der[si].push_back(tab.deriv[si][i]);
        }
      tab.tgrid = std::move(tg);
      tab.value = std::move(val);
      tab.deriv = std::move(der);
    };
    filter_table(fac.additive);
    if (fac.wrap_integral) filter_table(*fac.wrap_integral);
  }

  if (target) {
    double sup = 0.0;
    for (const auto& row : fac.wrap_integral->value)
      for (double v : row) sup = std::max(sup, v);
    fac.C = sup + 1.0;  // reproducible positivity margin
  }
  return fac;
}

}  // namespace

ConformalFactor minimalizing_factor(const MetricField& g, const SliceFunction& f,
                                    const CollarSpec& collar) {
  return build_factor(g, f, collar, nullptr);
}

ConformalFactor prescribing_factor(const MetricField& g, const SliceFunction& f,
                                   const std::function<double(std::span<const double>)>& target,
                                   std::optional<double> C,
                                   const CollarSpec& collar) {
  if (!target) throw_usage("prescribing_factor needs a target function");
  ConformalFactor fac = build_factor(g, f, collar, &target);
  if (C) {
    fac.C = *C;
    for (const auto& row : fac.wrap_integral->value)
      for (double v : row)
        if (!(fac.C - v > 0.0))
          throw_domain("log argument non-positive for the given C (C too small)");
  }
  return fac;
}

ConformalFactor cmc_factor(const MetricField& g, const SliceFunction& f,
                           const std::function<double(double)>& G,
                           const CollarSpec& collar, std::optional<double> C) {
  SliceFunction fs = f;
  auto target = [G, fs](std::span<const double> x) { return G(fs.f(x)); };
  return prescribing_factor(g, f, target, C, collar);
}

ConformalFactor cmc_factor_lambda(const MetricField& g, const SliceFunction& f,
                                  int lambda, const CollarSpec& collar,
                                  std::optional<double> C) {
  if (lambda != 1 && lambda != -1) throw_usage("lambda must be +1 or -1");
  return cmc_factor(g, f, [lambda](double t) { return lambda * t; }, collar, C);
}

}  // namespace cmcfol
