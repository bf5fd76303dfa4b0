#pragma once

#include <optional>
#include <vector>

#include "cmcfol/series.hpp"

namespace cmcfol {

// Collar metric in normal form g = h_r + dr^2, with h_r a truncated power
// series of boundary metrics. The compactified picture: g+ = g / r^2 is
// asymptotically hyperbolic with |dr|_g = 1 identically.
//
// An optional dr^2-coefficient series `grr` is accepted purely as a
// validation hook: the solvers reject inputs whose |dr|^2_g fails to be
// identically 1 (constant term != 1 reads as "not asymptotically
// hyperbolic"; an r-dependent grr as "not in normal form").
struct NormalFormMetric {
  int n = 0;  // manifold dimension; boundary has dimension n-1
  std::shared_ptr<const BoundaryChart> chart;
  std::vector<BoundarySeries> h;  // (n-1) x (n-1), row-major
  std::optional<BoundarySeries> grr;

  int bdim() const { return n - 1; }
  const BoundarySeries& h_entry(int i, int j) const { return h[i * bdim() + j]; }

  // Boundary-homogeneous metric from constant coefficient matrices
  // h_r = sum_j coeffs[j] r^j.
  static NormalFormMetric homogeneous(int n,
                                      const std::vector<std::vector<double>>& coeff_matrices,
                                      int order);

  void validate_ah() const;  // throws on the malformed-grr cases
  NormalFormMetric resized(int order) const;
};

// Series of the mean curvature H of the level sets of rbar = e^{omega} r
// under gbar = e^{2 omega} g, expanded in the base defining variable r and
// truncated at order N. Evaluates the conformally transformed level-set
// curvature identity term by term in the base metric:
//   (n-1) |v|^3 H e^{omega} = v^a v^b [ g_ab S - T_ab ],  v = r domega + dr,
// with S and T the transformed Laplacian/Hessian blocks of r and omega.
BoundarySeries mean_curvature_series(const NormalFormMetric& g,
                                     const BoundarySeries& omega, int N);

// |d rbar|^2_{gbar} - 1 = |r domega + dr|^2_g - 1, truncated at order N.
BoundarySeries ah_defect(const NormalFormMetric& g, const BoundarySeries& omega,
                         int N);

enum class ExpandMode { Minimal, Cmc };

struct ExpansionStep {
  int k = 0;
  double defect_low_orders = 0.0;  // max |coeff_j| over j < k before the step
  double ah_defect_const = 0.0;    // |dr|^2 - 1 constant coefficient after step
  double ratio_defect = 0.0;       // max |coeff_j|, 1 <= j <= k, of the
                                   // |dr_k|^2 / |dr_{k+1}|^2 expansion - 1
};

struct ExpansionState {
  int steps = 0;
  ExpandMode mode = ExpandMode::Minimal;
  BoundarySeries omega_total;  // cumulative conformal exponent (polynomial)
  BoundarySeries rbar;         // e^{omega} r; zero constant term
  BoundarySeries H;            // mean curvature series of the final slicing
  BoundarySeries defect;       // H (minimal) or H - rbar (cmc)
  BoundaryField F;             // last extracted defect coefficient
  std::vector<ExpansionStep> history;
};

// Inductive order raising: after step k the defect series (H, or H - rbar)
// has coefficients 0..k equal to zero. Runs steps k = 0..ell-1, so the final
// defect is O(r^ell). Series order defaults to ell + 2.
ExpansionState expand_minimal(const NormalFormMetric& g, int ell, int order = 0);
ExpansionState expand_cmc(const NormalFormMetric& g, int ell, int order = 0);

// H of the same leaf with respect to g+ = g / rho^2, from the compactified
// data: H^{g+} = rho H^g - |d rho|_g. At rho = 0 this is the boundary limit
// -|d rho|_g.
double interior_mean_curvature_relation(double H_g, double drho_norm,
                                        double rho);

}  // namespace cmcfol
