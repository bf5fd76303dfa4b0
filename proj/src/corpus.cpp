#include "cmcfol/corpus.hpp"

#include <cmath>
#include <cstdio>

namespace cmcfol {

namespace {

std::string var(int i) { return "x" + std::to_string(i + 1); }

std::string sum_of_squares(int n, std::span<const double> weights = {}) {
  std::string s;
  for (int i = 0; i < n; ++i) {
    if (i) s += " + ";
    if (!weights.empty() && weights[i] != 1.0) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.17g", weights[i]);
      s += std::string(buf) + "*" + var(i) + "^2";
    } else {
      s += var(i) + "^2";
    }
  }
  return s;
}

std::vector<std::string> identity_entries(int n) {
  std::vector<std::string> e(std::size_t(n) * n, "0");
  for (int i = 0; i < n; ++i) e[std::size_t(i) * n + i] = "1";
  return e;
}

std::vector<std::string> scaled_identity_entries(int n, const std::string& factor) {
  std::vector<std::string> e(std::size_t(n) * n, "0");
  for (int i = 0; i < n; ++i) e[std::size_t(i) * n + i] = factor;
  return e;
}

// Graph-chart metric of the unit sphere over an equatorial plane:
//   g_ij = delta_ij + x_i x_j / (1 - |x|^2)
std::vector<std::string> monge_sphere_entries(int n) {
  std::string denom = "(1 - (" + sum_of_squares(n) + "))";
  std::vector<std::string> e(std::size_t(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      std::string q = var(i) + "*" + var(j) + "/" + denom;
      e[std::size_t(i) * n + j] = (i == j) ? ("1 + " + q) : q;
    }
  return e;
}

double radius(std::span<const double> p) {
  double s = 0.0;
  for (double x : p) s += x * x;
  return std::sqrt(s);
}

std::vector<ProbeRay> radial_rays(int n, double s_min, double s_max) {
  // A handful of fixed directions; enough for multi-point leaf sampling.
  std::vector<Vec> dirs;
  Vec d1(n, 0.0);
  d1[0] = 1.0;
  dirs.push_back(d1);
  Vec d2(n, 1.0 / std::sqrt(double(n)));
  dirs.push_back(d2);
  Vec d3(n, 0.0);
  d3[0] = 0.6;
  d3[n - 1] = n >= 2 ? 0.8 : 0.0;
  dirs.push_back(d3);
  if (n >= 2) {
    Vec d4(n, 0.0);
    d4[0] = -0.8;
    d4[1] = 0.6;
    dirs.push_back(d4);
  }
  std::vector<ProbeRay> rays;
  for (auto& d : dirs) {
    double norm = radius(d);
    for (double& x : d) x /= norm;
    rays.push_back(ProbeRay{Vec(n, 0.0), d, s_min, s_max});
  }
  return rays;
}

std::vector<ProbeRay> vertical_rays(int n, double s_min, double s_max,
                                    double tangential_spread) {
  // Lines along the last coordinate at a few tangential offsets.
  std::vector<ProbeRay> rays;
  Vec dir(n, 0.0);
  dir[n - 1] = 1.0;
  for (double off : {0.0, 0.5, -0.5, 1.0}) {
    Vec origin(n, 0.0);
    origin[0] = off * tangential_spread;
    rays.push_back(ProbeRay{origin, dir, s_min, s_max});
  }
  return rays;
}

SliceFunction slice_expr(const std::string& src, int n) {
  return SliceFunction{ScalarField(Expression::parse(src, n)), 1e-8};
}

Expression closed_form(const std::string& src) {
  static const std::vector<std::string> tname = {"t"};
  return Expression::parse(src, 1, tname);
}

}  // namespace

double CorpusEntry::closed_H(double leaf_value) const {
  if (!closed_form_H)
    throw_usage("corpus entry '" + name + "' has no closed-form H(t)");
  Vec t = {leaf_value};
  return closed_form_H->eval(t);
}

Vec CorpusEntry::sample_point(unsigned long long& state) const {
  auto next = [&state]() {
    // xorshift64*; deterministic across platforms
    state ^= state >> 12;
    state ^= state << 25;
    state ^= state >> 27;
    return double((state * 2685821657736338717ull) >> 11) / 9007199254740992.0;
  };
  for (int tries = 0; tries < 10000; ++tries) {
    Vec p(dim);
    for (int i = 0; i < dim; ++i)
      p[i] = sample_lo[i] + (sample_hi[i] - sample_lo[i]) * next();
    if (!sample_predicate || sample_predicate(p)) return p;
  }
  throw_usage("corpus entry '" + name + "': sampling predicate too restrictive");
}

std::vector<std::string> corpus_names() {
  return {"euclidean-spheres", "euclidean-inverse-radius", "sphere-height",
          "halfspace-planes-euclidean", "halfspace-hyperbolic", "poincare-ball",
          "hyperbolic-normal-form", "warped-normal-form", "ellipse-noncmc"};
}

CorpusEntry corpus_get(const std::string& name, int dim) {
  CorpusEntry e;
  e.name = name;

  auto bad_dim = [&](int d) {
    throw_usage("corpus entry '" + name + "' does not support dimension " +
                std::to_string(d));
  };

  if (name == "euclidean-spheres") {
    int n = dim ? dim : 2;
    if (n < 2 || n > 4) bad_dim(n);
    e.dim = n;
    e.note = "concentric round spheres in Euclidean space, f = r^2";
    Chart chart = Chart::box(n, -6.0, 6.0);
    chart.excluded_locus = "origin (critical point of f)";
    e.metric = MetricField::from_expressions(chart, identity_entries(n));
    e.slicing = slice_expr(sum_of_squares(n), n);
    e.closed_form_H = closed_form("t^-0.5");
    e.closed_form_H_point = [](std::span<const double> p) {
      return 1.0 / radius(p);
    };
    e.expect_cmc = true;
    e.probe_rays = radial_rays(n, 0.05, 5.8);
    e.sample_lo.assign(n, -5.0);
    e.sample_hi.assign(n, 5.0);
    e.sample_predicate = [](std::span<const double> p) {
      double r = radius(p);
      return r > 0.3 && r < 5.0;
    };
    return e;
  }

  if (name == "euclidean-inverse-radius") {
    int n = dim ? dim : 2;
    if (n < 2 || n > 4) bad_dim(n);
    e.dim = n;
    e.note = "concentric round spheres in Euclidean space, f = 1/r";
    Chart chart = Chart::box(n, -6.0, 6.0);
    chart.excluded_locus = "origin";
    e.metric = MetricField::from_expressions(chart, identity_entries(n));
    e.slicing = slice_expr("(" + sum_of_squares(n) + ")^-0.5", n);
    e.closed_form_H = closed_form("-t");
    e.closed_form_H_point = [](std::span<const double> p) {
      return -1.0 / radius(p);
    };
    e.expect_cmc = true;
    e.probe_rays = radial_rays(n, 0.2, 5.5);
    e.sample_lo.assign(n, -4.0);
    e.sample_hi.assign(n, 4.0);
    e.sample_predicate = [](std::span<const double> p) {
      double r = radius(p);
      return r > 0.25 && r < 4.0;
    };
    return e;
  }

  if (name == "sphere-height") {
    int n = dim ? dim : 2;  // dimension of the sphere itself
    if (n < 2 || n > 4) bad_dim(n);
    e.dim = n;
    e.note = "round unit n-sphere in a graph chart over an equatorial "
             "hemisphere; slices of constant height t (the last chart "
             "coordinate)";
    Chart chart = Chart::box(n, -0.95, 0.95);
    chart.excluded_locus = "|y| -> 1 (chart boundary); foliation poles y = "
                           "(0,...,+-1)";
    e.metric = MetricField::from_expressions(chart, monge_sphere_entries(n));
    e.slicing = slice_expr(var(n - 1), n);
    e.closed_form_H = closed_form("-t/sqrt(1 - t^2)");
    e.expect_cmc = true;
    e.probe_rays = vertical_rays(n, -0.92, 0.92, 0.25);
    e.sample_lo.assign(n, -0.9);
    e.sample_hi.assign(n, 0.9);
    e.sample_predicate = [](std::span<const double> p) {
      return radius(p) < 0.9;
    };
    return e;
  }

  if (name == "halfspace-planes-euclidean" || name == "halfspace-hyperbolic") {
    int n = dim ? dim : 3;
    if (n < 2 || n > 4) bad_dim(n);
    e.dim = n;
    Chart chart;
    chart.dim = n;
    chart.lo.assign(n, -4.0);
    chart.hi.assign(n, 4.0);
    chart.lo[n - 1] = 0.005;
    chart.excluded_locus = "boundary plane z = 0";
    bool hyperbolic = name == "halfspace-hyperbolic";
    if (hyperbolic) {
      e.note = "hyperbolic upper half-space, horospherical slices z = const";
      e.metric = MetricField::from_expressions(
          chart, scaled_identity_entries(n, "1/" + var(n - 1) + "^2"));
      e.closed_form_H = closed_form("-1");
      e.closed_form_H_point = [](std::span<const double>) { return -1.0; };
    } else {
      e.note = "Euclidean upper half-space, minimal planes z = const";
      e.metric = MetricField::from_expressions(chart, identity_entries(n));
      e.closed_form_H = closed_form("0");
      e.closed_form_H_point = [](std::span<const double>) { return 0.0; };
    }
    e.slicing = slice_expr(var(n - 1), n);
    e.expect_cmc = true;
    e.probe_rays = vertical_rays(n, 0.01, 3.9, 1.0);
    e.sample_lo.assign(n, -3.0);
    e.sample_hi.assign(n, 3.0);
    e.sample_lo[n - 1] = 0.05;
    e.sample_hi[n - 1] = 3.0;
    return e;
  }

  if (name == "poincare-ball") {
    int n = dim ? dim : 3;
    if (n < 2 || n > 4) bad_dim(n);
    e.dim = n;
    e.note = "Poincare ball model of hyperbolic space, concentric spheres "
             "with inward orientation (f = 1/r)";
    Chart chart = Chart::box(n, -0.92, 0.92);
    chart.excluded_locus = "origin; boundary sphere |x| = 1";
    std::string s = "(" + sum_of_squares(n) + ")";
    e.metric = MetricField::from_expressions(
        chart, scaled_identity_entries(n, "4/(1 - " + s + ")^2"));
    e.slicing = slice_expr(s + "^-0.5", n);
    e.closed_form_H = closed_form("-(t^2 + 1)/(2*t)");
    e.closed_form_H_point = [](std::span<const double> p) {
      double r = radius(p);
      double t = 1.0 / r;  // leaf value
      return -(t * t + 1.0) / (2.0 * t);
    };
    e.expect_cmc = true;
    e.probe_rays = radial_rays(n, 0.08, 0.91);
    e.sample_lo.assign(n, -0.9);
    e.sample_hi.assign(n, 0.9);
    e.sample_predicate = [](std::span<const double> p) {
      double r = radius(p);
      return r > 0.15 && r < 0.9;
    };
    return e;
  }

  if (name == "hyperbolic-normal-form" || name == "warped-normal-form") {
    int n = dim ? dim : 3;
    if (n < 2 || n > 4) bad_dim(n);
    e.dim = n;
    Chart chart;
    chart.dim = n;
    chart.lo.assign(n, -3.0);
    chart.hi.assign(n, 3.0);
    chart.lo[n - 1] = 0.0005;
    chart.hi[n - 1] = 0.98;
    chart.excluded_locus = "boundary r = 0";
    bool warped = name == "warped-normal-form";
    if (warped) {
      e.note = "collar metric (1 + r) h_0 + dr^2 with flat boundary metric";
      std::vector<std::string> entries(std::size_t(n) * n, "0");
      for (int i = 0; i + 1 < n; ++i)
        entries[std::size_t(i) * n + i] = "1 + " + var(n - 1);
      entries[std::size_t(n - 1) * n + (n - 1)] = "1";
      e.metric = MetricField::from_expressions(chart, entries);
      e.closed_form_H = closed_form("1/(2*(1 + t))");
    } else {
      e.note = "exact hyperbolic collar h_0 + dr^2 (compactified upper "
               "half-space), flat boundary metric";
      e.metric = MetricField::from_expressions(chart, identity_entries(n));
      e.closed_form_H = closed_form("0");
    }
    e.slicing = slice_expr(var(n - 1), n);
    e.expect_cmc = true;
    e.probe_rays = vertical_rays(n, 0.001, 0.97, 1.0);
    e.sample_lo.assign(n, -2.0);
    e.sample_hi.assign(n, 2.0);
    e.sample_lo[n - 1] = 0.01;
    e.sample_hi[n - 1] = 0.9;
    int bd = n - 1;
    e.normal_form = [n, bd, warped](int order) {
      std::vector<double> id(std::size_t(bd) * bd, 0.0);
      for (int i = 0; i < bd; ++i) id[std::size_t(i) * bd + i] = 1.0;
      std::vector<std::vector<double>> coeffs = {id};
      if (warped) coeffs.push_back(id);  // h_r = (1 + r) h_0
      return NormalFormMetric::homogeneous(n, coeffs, order);
    };
    return e;
  }

  if (name == "ellipse-noncmc") {
    int n = dim ? dim : 2;
    if (n < 2 || n > 4) bad_dim(n);
    e.dim = n;
    e.note = "confocal ellipses/ellipsoids x^2 + 4 y^2 (+ 9 z^2): not CMC";
    Chart chart = Chart::box(n, -5.0, 5.0);
    chart.excluded_locus = "origin";
    e.metric = MetricField::from_expressions(chart, identity_entries(n));
    Vec w(n);
    for (int i = 0; i < n; ++i) w[i] = double((i + 1) * (i + 1));
    e.slicing = slice_expr(sum_of_squares(n, w), n);
    if (n == 2) {
      e.closed_form_H_point = [](std::span<const double> p) {
        double x = p[0], y = p[1];
        double u = x * x + 16.0 * y * y;
        return (4.0 * x * x + 16.0 * y * y) / (u * std::sqrt(u));
      };
    }
    e.expect_cmc = false;
    e.probe_rays = radial_rays(n, 0.05, 4.8);
    e.sample_lo.assign(n, -2.0);
    e.sample_hi.assign(n, 2.0);
    e.sample_predicate = [](std::span<const double> p) {
      return radius(p) > 0.3;
    };
    return e;
  }

  std::string names;
  for (const auto& s : corpus_names()) names += (names.empty() ? "" : ", ") + s;
  throw_usage("unknown corpus entry '" + name + "'; available: " + names);
}

}  // namespace cmcfol
