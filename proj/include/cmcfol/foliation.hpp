#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmcfol/geometry.hpp"

namespace cmcfol {

// Scalar field whose level sets foliate the chart. The gradient threshold is
// enforced on every operation: |df|_g below eps_df is a hard error, since the
// level-set formulas all divide by it.
struct SliceFunction {
  ScalarField f;
  double eps_df = 1e-8;
};

struct CurvatureSample {
  Vec point;
  double H = 0.0;
  Vec nu;          // unit conormal (covector components)
  double df_norm = 0.0;
};

struct LeafStat {
  double leaf_value = 0.0;
  double h_mean = 0.0;
  double h_min = 0.0, h_max = 0.0;
  double spread = 0.0;
  int samples = 0;
};

struct CmcReport {
  bool is_cmc = false;
  bool insufficient_samples = false;
  double tol = 0.0;
  std::vector<LeafStat> leaves;  // fitted (leaf value, H) table
};

struct ProbeRay {
  Vec origin;
  Vec direction;
  double s_min = 0.0, s_max = 1.0;
};

// nu = df / |df|_g (covector, unit with respect to g)
Vec unit_normal(const MetricField& g, const SliceFunction& f,
                std::span<const double> p);

// h_ab = (delta_a^c - nu_a nu^c) nabla_c nu_b, tangentially restricted.
Mat second_fundamental_form(const MetricField& g, const SliceFunction& f,
                            std::span<const double> p);

// Mean curvature of the level set through p:
//   (n-1) H = Delta f / |df| - (grad f, grad f)-trace of Hess f / |df|^3.
// In debug builds the value is cross-checked against the divergence form
// H = div(nu)/(n-1).
CurvatureSample mean_curvature(const MetricField& g, const SliceFunction& f,
                               std::span<const double> p);

// Independent route: H = (1/(n-1)) nabla_a nu^a, expanded in coordinates.
double mean_curvature_divergence_form(const MetricField& g,
                                      const SliceFunction& f,
                                      std::span<const double> p);

enum class ResidualForm { Standard, Rational };

// Standard form:  (n-1) lambda f |df|^3 - (|df|^2 Delta f - f^a f^b Hess_ab f)
// Rational form:  same with the mean-curvature field H in place of f; the
// rational form has no |dH| division and is evaluated even where dH is small.
double generic_cmc_residual(const MetricField& g, const SliceFunction& f,
                            int lambda, std::span<const double> p,
                            ResidualForm form = ResidualForm::Standard,
                            double h_field_fd_step = 1e-4);

// Samples each requested leaf along the probe rays (bisection + Newton
// polish on f(ray(s)) = t) and reports the per-leaf spread of H. Leaves with
// fewer than min_samples points set the insufficient_samples flag.
// tol <= 0 selects the default relative tolerance 1e-6 * (1 + |H|).
CmcReport detect_cmc(const MetricField& g, const SliceFunction& f,
                     std::span<const double> leaf_values,
                     std::span<const ProbeRay> rays, double tol = 0.0,
                     int min_samples = 2);

// For a slicing with globally constant H, returns the monotone
// reparametrization F (as a table of (f value, F(f)) pairs, anchored to 0 at
// the start of gamma) such that |d(F o f o gamma)| = 1 with respect to the
// arc-length parameter of gamma.
struct NormalizeResult {
  std::vector<std::pair<double, double>> table;  // (f, F(f))
};
NormalizeResult normalize_constant_H(const MetricField& g,
                                     const SliceFunction& f,
                                     std::span<const double> arc_params,
                                     std::span<const Vec> gamma_points,
                                     double h_constancy_tol = 1e-6);

// Directional derivative of f -> H_f at f in direction u, in the general
// divergence form (expanded exactly through second jets of f and u).
double linearize_mean_curvature(const MetricField& g, const SliceFunction& f,
                                const ScalarField& u, std::span<const double> p);

}  // namespace cmcfol
