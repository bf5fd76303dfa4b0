#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "cmcfol/foliation.hpp"

namespace cmcfol {

// Mean curvature of the same leaf after replacing g by e^{2 omega} g:
//   H^ghat = e^{-omega} (H^g + nu^a d_a omega),
// with nu the g-unit conormal of the leaf. Only the gradient of omega enters.
double transform_mean_curvature(double H, const ScalarField& omega,
                                std::span<const double> nu,
                                const MetricField& g, std::span<const double> p);

struct StepControl {
  double rel_tol = 1e-8;
  double h_init = 1e-2;
  double h_min = 1e-12;
  double h_max = 0.25;
};

struct FlowNode {
  double t = 0.0;       // leaf value = curve parameter
  Vec x;                // point
  double df_norm = 0.0;
  double integral = 0.0;  // accumulated user integral
};

struct FlowLine {
  Vec seed;
  std::vector<FlowNode> nodes;  // t strictly monotone
};

// Integral curve of X = grad f / |grad f|^2_g starting on the leaf f = t0;
// df(X) = 1, so the curve parameter is the leaf value itself and the curve is
// conformally invariant. `integrand`, when given, is accumulated as
// integral(t) = int_{t0}^{t} integrand(x(s)) ds.
FlowLine integrate_flow_line(const MetricField& g, const SliceFunction& f,
                             std::span<const double> seed,
                             std::span<const double> sample_ts,
                             const StepControl& ctl = {},
                             const std::function<double(std::span<const double>)>&
                                 integrand = nullptr);

struct CollarSpec {
  double t0 = 0.0;             // reference leaf (omega anchored to 0 there)
  double t_min = 0.0, t_max = 1.0;
  std::vector<Vec> seeds;      // user grid on the reference leaf
  int t_samples = 161;
  StepControl step;
};

// Conformal exponent tabulated along flow lines over a (t x seed) grid.
// The additive part vanishes on the reference leaf; prescription-type factors
// add -log(C - I(t, seed)) on top. The positivity constant C stays explicit:
// shifting omega by a constant would rescale the prescribed curvature.
class ConformalFactor {
public:
  struct Table {
    std::vector<double> tgrid;
    std::vector<std::vector<double>> value;  // [seed][node]
    std::vector<std::vector<double>> deriv;  // d/dt, for cubic Hermite interp
    double eval(int seed, double t) const;
  };

  double t0 = 0.0;
  // Nominal collar range; the tables may carry a few padding nodes beyond it
  // so that derivative stencils at the collar edge stay accurate.
  double t_lo = 0.0, t_hi = 0.0;
  std::vector<Vec> seeds;
  Table additive;                   // omega-ring part; 0 at t0
  std::optional<Table> wrap_integral;  // I; 0 at t0
  double C = 1.0;

  double omega(double t, int seed_index) const;
  double omega_interp(double t, double seed_coord) const;

  // True when omega is (numerically) a function of the leaf value alone.
  bool leaf_constant(double tol = 1e-7) const;

  // omega as a scalar field. Leaf-constant factors evaluate through f(p);
  // otherwise the point is traced back along its flow line to the reference
  // leaf to find its seed coordinate.
  double omega_at_point(const MetricField& g, const SliceFunction& f,
                        std::span<const double> p) const;

  // e^{2 omega} g with finite-difference derivative access, for independent
  // re-computation of curvatures under the rescaled metric.
  MetricField rescaled_metric(const MetricField& g, const SliceFunction& f,
                              double fd_step = 1e-4) const;
};

// omega(t, x) = -int_{t0}^{t} H^g / |df|_g ds along flow lines, so that the
// slicing is minimal for e^{2 omega} g on the collar.
ConformalFactor minimalizing_factor(const MetricField& g, const SliceFunction& f,
                                    const CollarSpec& collar);

// Two-stage prescription: first minimalize (factor ring omega), then wrap
//   omega = ring omega - log(C - int_{t0}^t h e^{ring omega} / |df|_g ds),
// so that H^{e^{2 omega} g} = h. C = nullopt selects sup(I) + 1.
ConformalFactor prescribing_factor(const MetricField& g, const SliceFunction& f,
                                   const std::function<double(std::span<const double>)>& target,
                                   std::optional<double> C,
                                   const CollarSpec& collar);

// prescribing_factor specialized to h = G(f); lambda mode is G(t) = lambda t.
ConformalFactor cmc_factor(const MetricField& g, const SliceFunction& f,
                           const std::function<double(double)>& G,
                           const CollarSpec& collar,
                           std::optional<double> C = std::nullopt);
ConformalFactor cmc_factor_lambda(const MetricField& g, const SliceFunction& f,
                                  int lambda, const CollarSpec& collar,
                                  std::optional<double> C = std::nullopt);

}  // namespace cmcfol
