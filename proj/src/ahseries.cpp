#include "cmcfol/ahseries.hpp"

#include <cmath>

#include "cmcfol/linalg.hpp"

namespace cmcfol {

// ---- NormalFormMetric ----------------------------------------------------

NormalFormMetric NormalFormMetric::homogeneous(
    int n, const std::vector<std::vector<double>>& coeff_matrices, int order) {
  if (n < 2) throw_usage("normal-form metric needs n >= 2");
  NormalFormMetric g;
  g.n = n;
  g.chart = BoundaryChart::homogeneous();
  int bd = n - 1;
  g.h.assign(std::size_t(bd) * bd, BoundarySeries(g.chart, order));
  for (std::size_t p = 0; p < coeff_matrices.size(); ++p) {
    const auto& m = coeff_matrices[p];
    if (int(m.size()) != bd * bd)
      throw_usage("normal-form coefficient matrix has wrong size");
    if (int(p) > order) throw_usage("normal-form coefficients exceed series order");
    for (int i = 0; i < bd * bd; ++i)
      g.h[i].coeff_ref(int(p)) = BoundaryField(g.chart, m[i]);
  }
  g.validate_ah();
  return g;
}

void NormalFormMetric::validate_ah() const {
  if (int(h.size()) != bdim() * bdim())
    throw_usage("normal-form metric needs (n-1)^2 h entries");
  // h_0 must be positive definite at every boundary node.
  int bd = bdim();
  int nodes = chart->nodes();
  for (int node = 0; node < nodes; ++node) {
    Mat h0(bd);
    for (int i = 0; i < bd; ++i)
      for (int j = 0; j < bd; ++j) h0(i, j) = h_entry(i, j).coeff(0)[node];
    h0.symmetrize();
    cholesky(h0, "boundary metric h_0");
  }
  if (grr) {
    double c0_lo = grr->coeff(0).min_value();
    double c0_hi = grr->coeff(0).max_abs();
    if (std::abs(c0_lo - 1.0) > 1e-12 || std::abs(c0_hi - 1.0) > 1e-12)
      throw_domain("not asymptotically hyperbolic: |dr|^2_g = " +
                   std::to_string(1.0 / c0_lo) + " at the boundary");
    for (int j = 1; j <= grr->order(); ++j)
      if (grr->coeff(j).max_abs() != 0.0)
        throw_domain("metric not in normal form: dr^2 coefficient depends on r");
  }
}

NormalFormMetric NormalFormMetric::resized(int order) const {
  NormalFormMetric out = *this;
  for (auto& e : out.h) e = e.truncated(order);
  if (out.grr) out.grr = out.grr->truncated(order);
  return out;
}

// ---- series-valued linear algebra -----------------------------------------

namespace {

using SeriesVec = std::vector<BoundarySeries>;  // bd entries
using SeriesMat = std::vector<BoundarySeries>;  // bd*bd entries, row-major

// Order-by-order inverse of a series of SPD matrices:
//   M_0 = H_0^{-1},  M_k = -M_0 sum_{j=1..k} H_j M_{k-j}.
SeriesMat series_matrix_inverse(const NormalFormMetric& g, int W) {
  int bd = g.bdim();
  auto chart = g.chart;
  int nodes = chart->nodes();

  // coefficient-major copies
  auto Hc = [&](int p, int i, int j, int node) {
    return g.h_entry(i, j).coeff(p)[node];
  };

  std::vector<std::vector<Mat>> M(W + 1,
                                  std::vector<Mat>(nodes, Mat(bd)));
  for (int node = 0; node < nodes; ++node) {
    Mat h0(bd);
    for (int i = 0; i < bd; ++i)
      for (int j = 0; j < bd; ++j) h0(i, j) = Hc(0, i, j, node);
    h0.symmetrize();
    M[0][node] = spd_inverse(h0, "boundary metric h_0");
  }
  for (int k = 1; k <= W; ++k) {
    for (int node = 0; node < nodes; ++node) {
      Mat acc(bd);
      for (int j = 1; j <= k; ++j) {
        Mat hj(bd);
        for (int i = 0; i < bd; ++i)
          for (int c = 0; c < bd; ++c) hj(i, c) = Hc(j, i, c, node);
        acc = acc + matmul(hj, M[k - j][node]);
      }
      M[k][node] = -1.0 * matmul(M[0][node], acc);
    }
  }

  SeriesMat out(std::size_t(bd) * bd, BoundarySeries(chart, W));
  int h_ord = W;
  for (const auto& e : g.h) h_ord = std::min(h_ord, e.order());
  for (int i = 0; i < bd; ++i)
    for (int j = 0; j < bd; ++j) {
      BoundarySeries s(chart, W);
      for (int p = 0; p <= W; ++p)
        for (int node = 0; node < nodes; ++node)
          s.coeff_ref(p)[node] = M[p][node](i, j);
      s.mark_inexact(h_ord);  // trusted only as far as the input metric
      out[std::size_t(i) * bd + j] = s;
    }
  return out;
}

struct CollarQuantities {
  int n = 0, bd = 0, W = 0;
  std::shared_ptr<const BoundaryChart> chart;
  SeriesMat h, hp, hinv;
  BoundarySeries omega, w_r, w_rr;
  SeriesVec w_t;        // tangential derivatives of omega
  SeriesVec w_rt;       // d_r of tangential derivatives
  BoundarySeries vnorm2;  // |r domega + dr|^2_g
};

CollarQuantities collar_quantities(const NormalFormMetric& g_in,
                                   const BoundarySeries& omega_in, int W) {
  CollarQuantities q;
  q.n = g_in.n;
  q.bd = g_in.bdim();
  q.W = W;
  q.chart = g_in.chart;
  if (omega_in.chart() != g_in.chart)
    throw_usage("omega lives on a different boundary chart than the metric");

  NormalFormMetric g = g_in.resized(W);
  q.omega = omega_in.truncated(W);
  q.h.assign(g.h.begin(), g.h.end());
  q.hp.reserve(q.h.size());
  for (const auto& e : q.h) q.hp.push_back(e.derivative_r());
  q.hinv = series_matrix_inverse(g, W);

  q.w_r = q.omega.derivative_r();
  q.w_rr = q.w_r.derivative_r();
  q.w_t.reserve(q.bd);
  q.w_rt.reserve(q.bd);
  for (int i = 0; i < q.bd; ++i) {
    q.w_t.push_back(q.omega.tangential_derivative(i));
    q.w_rt.push_back(q.w_t.back().derivative_r());
  }

  // |v|^2 = 1 + 2 r w_r + r^2 (w_r^2 + h^{ij} w_i w_j)
  BoundarySeries tang = BoundarySeries(q.chart, W);
  for (int i = 0; i < q.bd; ++i)
    for (int j = 0; j < q.bd; ++j)
      tang = tang + q.hinv[std::size_t(i) * q.bd + j] * q.w_t[i] * q.w_t[j];
  q.vnorm2 = BoundarySeries::constant(q.chart, 1.0, W) +
             2.0 * q.w_r.shifted_up(1) +
             (q.w_r * q.w_r + tang).shifted_up(2);
  return q;
}

}  // namespace

BoundarySeries ah_defect(const NormalFormMetric& g, const BoundarySeries& omega,
                         int N) {
  g.validate_ah();
  CollarQuantities q = collar_quantities(g, omega, std::max(N, omega.order()));
  return (q.vnorm2 - BoundarySeries::constant(q.chart, 1.0, q.W)).truncated(N);
}

BoundarySeries mean_curvature_series(const NormalFormMetric& g_in,
                                     const BoundarySeries& omega, int N) {
  g_in.validate_ah();
  if (omega.order() < N)
    throw_usage("omega series order " + std::to_string(omega.order()) +
                " is below the requested truncation " + std::to_string(N));
  int W = std::max(N, omega.order());
  CollarQuantities q = collar_quantities(g_in, omega, W);
  int n = q.n, bd = q.bd;
  auto chart = q.chart;
  auto hinv = [&](int i, int j) -> const BoundarySeries& {
    return q.hinv[std::size_t(i) * bd + j];
  };
  auto h = [&](int i, int j) -> const BoundarySeries& {
    return q.h[std::size_t(i) * bd + j];
  };
  auto hp = [&](int i, int j) -> const BoundarySeries& {
    return q.hp[std::size_t(i) * bd + j];
  };

  // Boundary Christoffels of the family h_r (series in r):
  //   Gamma^k_{ij} = 1/2 h^{kl} (d_i h_lj + d_j h_li - d_l h_ij)
  std::vector<SeriesVec> dh(bd);  // dh[l] = tangential derivative of all h
  for (int l = 0; l < bd; ++l) {
    dh[l].reserve(q.h.size());
    for (const auto& e : q.h) dh[l].push_back(e.tangential_derivative(l));
  }
  auto dh_at = [&](int l, int i, int j) -> const BoundarySeries& {
    return dh[l][std::size_t(i) * bd + j];
  };

  // Covariant Hessian of omega over the collar, indices {tangential, r}:
  //   W_rr = w_rr
  //   W_ri = d_r w_i - Gamma^j_{ri} w_j,        Gamma^j_{ri} = 1/2 h^{jk} hp_ki
  //   W_ij = d_i w_j - Gamma^k_{ij} w_k + 1/2 hp_ij w_r
  std::vector<BoundarySeries> W_ri(bd, BoundarySeries(chart, W));
  for (int i = 0; i < bd; ++i) {
    BoundarySeries acc = q.w_rt[i];
    for (int j = 0; j < bd; ++j) {
      BoundarySeries gamma_jri(chart, W);
      for (int k = 0; k < bd; ++k)
        gamma_jri = gamma_jri + hinv(j, k) * hp(k, i);
      acc = acc - 0.5 * (gamma_jri * q.w_t[j]);
    }
    W_ri[i] = acc;
  }
  std::vector<BoundarySeries> W_ij(std::size_t(bd) * bd,
                                   BoundarySeries(chart, W));
  for (int i = 0; i < bd; ++i)
    for (int j = 0; j < bd; ++j) {
      BoundarySeries acc = q.w_t[j].tangential_derivative(i);
      for (int k = 0; k < bd; ++k) {
        BoundarySeries gamma_kij(chart, W);
        for (int l = 0; l < bd; ++l)
          gamma_kij = gamma_kij +
                      hinv(k, l) * (dh_at(i, l, j) + dh_at(j, l, i) - dh_at(l, i, j));
        acc = acc - 0.5 * (gamma_kij * q.w_t[k]);
      }
      acc = acc + 0.5 * (hp(i, j) * q.w_r);
      W_ij[std::size_t(i) * bd + j] = acc;
    }

  // Laplacians and scalar blocks.
  BoundarySeries lap_r(chart, W);  // Delta r = 1/2 h^{ij} hp_ij
  for (int i = 0; i < bd; ++i)
    for (int j = 0; j < bd; ++j) lap_r = lap_r + hinv(i, j) * hp(i, j);
  lap_r = 0.5 * lap_r;

  BoundarySeries lap_w = q.w_rr;
  for (int i = 0; i < bd; ++i)
    for (int j = 0; j < bd; ++j)
      lap_w = lap_w + hinv(i, j) * W_ij[std::size_t(i) * bd + j];

  BoundarySeries wc2(chart, W);  // |domega|^2
  for (int i = 0; i < bd; ++i)
    for (int j = 0; j < bd; ++j) wc2 = wc2 + hinv(i, j) * (q.w_t[i] * q.w_t[j]);
  wc2 = wc2 + q.w_r * q.w_r;

  // S = Delta r + r Delta omega + n w_r + (n-1) r |domega|^2
  BoundarySeries S = lap_r + lap_w.shifted_up(1) + double(n) * q.w_r +
                     double(n - 1) * wc2.shifted_up(1);

  // T_ab = Hess_ab r + r Hess_ab omega + g_ab w_r - r w_a w_b + r g_ab |dw|^2
  // B_ab = g_ab S - T_ab
  BoundarySeries B_rr = S - (q.w_rr.shifted_up(1) + q.w_r -
                             (q.w_r * q.w_r).shifted_up(1) + wc2.shifted_up(1));
  std::vector<BoundarySeries> B_ri(bd, BoundarySeries(chart, W));
  for (int i = 0; i < bd; ++i)
    B_ri[i] = ((q.w_r * q.w_t[i]) - W_ri[i]).shifted_up(1);
  std::vector<BoundarySeries> B_ij(std::size_t(bd) * bd,
                                   BoundarySeries(chart, W));
  for (int i = 0; i < bd; ++i)
    for (int j = 0; j < bd; ++j) {
      BoundarySeries t = 0.5 * hp(i, j) +
                         W_ij[std::size_t(i) * bd + j].shifted_up(1) +
                         h(i, j) * q.w_r -
                         (q.w_t[i] * q.w_t[j]).shifted_up(1) +
                         (h(i, j) * wc2).shifted_up(1);
      B_ij[std::size_t(i) * bd + j] = h(i, j) * S - t;
    }

  // v_a = r w_a + dr;  raise with the block metric.
  BoundarySeries v_r = BoundarySeries::constant(chart, 1.0, W) +
                       q.w_r.shifted_up(1);
  SeriesVec v_t_up(bd, BoundarySeries(chart, W));
  for (int i = 0; i < bd; ++i) {
    BoundarySeries acc(chart, W);
    for (int j = 0; j < bd; ++j) acc = acc + hinv(i, j) * q.w_t[j];
    v_t_up[i] = acc.shifted_up(1);
  }

  BoundarySeries rhs = v_r * v_r * B_rr;
  for (int i = 0; i < bd; ++i) rhs = rhs + 2.0 * (v_r * v_t_up[i] * B_ri[i]);
  for (int i = 0; i < bd; ++i)
    for (int j = 0; j < bd; ++j)
      rhs = rhs + v_t_up[i] * v_t_up[j] * B_ij[std::size_t(i) * bd + j];

  // (n-1) |v|^3 e^{omega} H = rhs
  BoundarySeries vnorm3 = q.vnorm2 * sqrt_series(q.vnorm2);
  BoundarySeries H = (1.0 / (n - 1)) *
                     (rhs * recip(vnorm3) * exp_series(-1.0 * q.omega));
  return H.truncated(N);
}

// ---- inductive expansion ---------------------------------------------------

namespace {

ExpansionState run_expansion(const NormalFormMetric& g, int ell, int order,
                             ExpandMode mode) {
  if (ell < 1) throw_usage("expansion order ell must be >= 1");
  g.validate_ah();
  int N = std::max(order, ell + 2);

  ExpansionState st;
  st.mode = mode;
  st.omega_total = BoundarySeries(g.chart, N);  // zero polynomial

  auto rbar_of = [&](const BoundarySeries& w) {
    return exp_series(w).shifted_up(1).truncated(N);
  };
  auto defect_of = [&](const BoundarySeries& H, const BoundarySeries& w) {
    return mode == ExpandMode::Cmc ? (H - rbar_of(w)).truncated(N) : H;
  };

  BoundarySeries prev_vnorm2 =
      (ah_defect(g, st.omega_total, N) + BoundarySeries::constant(g.chart, 1.0, N));

  for (int k = 0; k < ell; ++k) {
    BoundarySeries H = mean_curvature_series(g, st.omega_total, N);
    BoundarySeries defect = defect_of(H, st.omega_total);

    ExpansionStep stepinfo;
    stepinfo.k = k;
    for (int j = 0; j < k; ++j)
      stepinfo.defect_low_orders =
          std::max(stepinfo.defect_low_orders, defect.max_abs_coeff(j));

    st.F = defect.coeff(k);
    BoundarySeries step = BoundarySeries::monomial(
        (-1.0 / (k + 1)) * st.F, k + 1, N);
    st.omega_total = st.omega_total + step;

    BoundarySeries vnorm2 =
        ah_defect(g, st.omega_total, N) + BoundarySeries::constant(g.chart, 1.0, N);
    stepinfo.ah_defect_const = (vnorm2.coeff(0) - BoundaryField(g.chart, 1.0)).max_abs();
    BoundarySeries ratio = prev_vnorm2 * recip(vnorm2);
    for (int j = 1; j <= k && j <= ratio.order(); ++j)
      stepinfo.ratio_defect = std::max(stepinfo.ratio_defect, ratio.max_abs_coeff(j));
    prev_vnorm2 = vnorm2;

    st.history.push_back(stepinfo);
    st.steps = k + 1;
  }

  st.H = mean_curvature_series(g, st.omega_total, N);
  st.rbar = rbar_of(st.omega_total);
  st.defect = defect_of(st.H, st.omega_total);
  return st;
}

}  // namespace

ExpansionState expand_minimal(const NormalFormMetric& g, int ell, int order) {
  return run_expansion(g, ell, order, ExpandMode::Minimal);
}

ExpansionState expand_cmc(const NormalFormMetric& g, int ell, int order) {
  return run_expansion(g, ell, order, ExpandMode::Cmc);
}

double interior_mean_curvature_relation(double H_g, double drho_norm,
                                        double rho) {
  if (rho < 0.0) throw_precondition("defining-function value must be >= 0");
  return rho * H_g - drho_norm;
}

}  // namespace cmcfol
