#pragma once

// Test-only brute-force oracle for the boundary-homogeneous expansion
// solvers. Deliberately independent of the library's series engine: plain
// double-coefficient polynomials and the warped-product curvature formula
//   (n - 1) H = e^{-omega} ( (n - 1) a'/(2a) + (n - 1) omega' )
// for metrics e^{2 omega} (a(r) h_0 + dr^2) with flat h_0.

#include <cmath>
#include <vector>

namespace series_oracle {

using Poly = std::vector<double>;  // c[j] is the r^j coefficient

inline Poly pmul(const Poly& a, const Poly& b, int N) {
  Poly c(N + 1, 0.0);
  for (int i = 0; i <= N && i < int(a.size()); ++i)
    for (int j = 0; i + j <= N && j < int(b.size()); ++j)
      c[i + j] += a[i] * b[j];
  return c;
}

inline Poly padd(const Poly& a, const Poly& b, double sb, int N) {
  Poly c(N + 1, 0.0);
  for (int j = 0; j <= N; ++j) {
    if (j < int(a.size())) c[j] += a[j];
    if (j < int(b.size())) c[j] += sb * b[j];
  }
  return c;
}

inline Poly pexp(const Poly& a, int N) {
  Poly e(N + 1, 0.0);
  e[0] = std::exp(a[0]);
  for (int k = 1; k <= N; ++k) {
    double s = 0.0;
    for (int j = 1; j <= k; ++j)
      if (j < int(a.size())) s += j * a[j] * e[k - j];
    e[k] = s / k;
  }
  return e;
}

inline Poly precip(const Poly& a, int N) {
  Poly r(N + 1, 0.0);
  r[0] = 1.0 / a[0];
  for (int k = 1; k <= N; ++k) {
    double s = 0.0;
    for (int j = 1; j <= k; ++j)
      if (j < int(a.size())) s += a[j] * r[k - j];
    r[k] = -s * r[0];
  }
  return r;
}

inline Poly pderiv(const Poly& a, int N) {
  Poly d(N + 1, 0.0);
  for (int j = 0; j < N && j + 1 < int(a.size()); ++j) d[j] = (j + 1) * a[j + 1];
  return d;
}

inline Poly oracle_H(const Poly& a, const Poly& omega, int N) {
  Poly ap = pderiv(a, N);
  Poly term = pmul(ap, precip(a, N), N);  // a'/a
  Poly wp = pderiv(omega, N);
  Poly sum = padd(term, wp, 2.0, N);  // a'/a + 2 omega'
  for (double& x : sum) x *= 0.5;
  Poly em(omega.size());
  for (std::size_t i = 0; i < omega.size(); ++i) em[i] = -omega[i];
  return pmul(pexp(em, N), sum, N);
}

struct OracleResult {
  Poly omega;
  Poly H;
};

inline OracleResult oracle_expand(const Poly& a, int ell, int N, bool cmc) {
  OracleResult res;
  res.omega.assign(N + 1, 0.0);
  for (int k = 0; k < ell; ++k) {
    Poly H = oracle_H(a, res.omega, N);
    Poly defect = H;
    if (cmc) {
      Poly rbar = pexp(res.omega, N);
      rbar.insert(rbar.begin(), 0.0);
      rbar.resize(N + 1);
      defect = padd(H, rbar, -1.0, N);
    }
    res.omega[k + 1] -= defect[k] / (k + 1);
  }
  res.H = oracle_H(a, res.omega, N);
  return res;
}

}  // namespace series_oracle
