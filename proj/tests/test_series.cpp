#include <doctest.h>

#include <cmath>
#include <random>

#include "cmcfol/series.hpp"

using namespace cmcfol;

namespace {

auto H0 = BoundaryChart::homogeneous();

BoundarySeries from_coeffs(const std::vector<double>& c, int order) {
  BoundarySeries s(H0, order);
  for (std::size_t j = 0; j < c.size(); ++j)
    s.coeff_ref(int(j)) = BoundaryField(H0, c[j]);
  return s;
}

double at(const BoundarySeries& s, int j) { return s.coeff(j)[0]; }

BoundarySeries random_series(std::mt19937& rng, int order, double c0) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> c(order + 1);
  c[0] = c0;
  for (int j = 1; j <= order; ++j) c[j] = d(rng);
  return from_coeffs(c, order);
}

// Independent direct-convolution product, used as the ring-axiom oracle.
std::vector<double> convolve(const std::vector<double>& a,
                             const std::vector<double>& b, int order) {
  std::vector<double> c(order + 1, 0.0);
  for (int i = 0; i <= order; ++i)
    for (int j = 0; i + j <= order && j <= order; ++j)
      if (i < int(a.size()) && j < int(b.size())) c[i + j] += a[i] * b[j];
  return c;
}

}  // namespace

TEST_SUITE("series") {

TEST_CASE("exponential of r") {
  BoundarySeries r = from_coeffs({0, 1}, 6);
  BoundarySeries e = exp_series(r);
  double fact = 1.0;
  for (int j = 0; j <= 6; ++j) {
    if (j > 0) fact *= j;
    CHECK(at(e, j) == doctest::Approx(1.0 / fact).epsilon(1e-14));
  }
}

TEST_CASE("reciprocal inverts multiplication") {
  std::mt19937 rng(3);
  for (int it = 0; it < 50; ++it) {
    BoundarySeries a = random_series(rng, 8, 2.0);
    BoundarySeries prod = a * recip(a);
    CHECK(at(prod, 0) == doctest::Approx(1.0).epsilon(1e-13));
    for (int j = 1; j <= 8; ++j)
      CHECK(std::abs(at(prod, j)) < 1e-12);
    BoundarySeries back = recip(prod);
    CHECK(at(back, 0) == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("sqrt of 1 - r^2") {
  BoundarySeries s = from_coeffs({1, 0, -1}, 6);
  BoundarySeries root = sqrt_series(s);
  // binomial series sqrt(1 - x) at x = r^2
  CHECK(at(root, 0) == doctest::Approx(1.0));
  CHECK(at(root, 2) == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(at(root, 4) == doctest::Approx(-0.125).epsilon(1e-14));
  CHECK(at(root, 6) == doctest::Approx(-1.0 / 16).epsilon(1e-13));
  CHECK(std::abs(at(root, 1)) + std::abs(at(root, 3)) + std::abs(at(root, 5)) <
        1e-15);
  // square back
  BoundarySeries sq = root * root;
  CHECK(at(sq, 0) == doctest::Approx(1.0));
  CHECK(at(sq, 2) == doctest::Approx(-1.0));
  for (int j : {1, 3, 4, 5, 6}) CHECK(std::abs(at(sq, j)) < 1e-13);
}

TEST_CASE("ring axioms on random series") {
  std::mt19937 rng(17);
  for (int it = 0; it < 100; ++it) {
    BoundarySeries a = random_series(rng, 7, 0.7);
    BoundarySeries b = random_series(rng, 7, -1.2);
    BoundarySeries c = random_series(rng, 7, 0.4);
    BoundarySeries left = (a * b) * c;
    BoundarySeries right = a * (b * c);
    for (int j = 0; j <= 7; ++j)
      CHECK(std::abs(at(left, j) - at(right, j)) < 1e-12);
    BoundarySeries dist = a * (b + c);
    BoundarySeries dist2 = a * b + a * c;
    for (int j = 0; j <= 7; ++j)
      CHECK(std::abs(at(dist, j) - at(dist2, j)) < 1e-12);
  }
}

TEST_CASE("multiplication matches direct convolution") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int it = 0; it < 50; ++it) {
    std::vector<double> ac(9), bc(9);
    for (auto& x : ac) x = d(rng);
    for (auto& x : bc) x = d(rng);
    BoundarySeries a = from_coeffs(ac, 8), b = from_coeffs(bc, 8);
    BoundarySeries p = a * b;
    std::vector<double> want = convolve(ac, bc, 8);
    for (int j = 0; j <= 8; ++j)
      CHECK(at(p, j) == doctest::Approx(want[j]).epsilon(1e-13));
  }
}

TEST_CASE("exp and log are mutually inverse") {
  std::mt19937 rng(29);
  for (int it = 0; it < 100; ++it) {
    BoundarySeries a = random_series(rng, 7, 1.5);  // positive constant term
    BoundarySeries lg = log_series(a);
    BoundarySeries back = exp_series(lg);
    for (int j = 0; j <= 7; ++j)
      CHECK(std::abs(at(back, j) - at(a, j)) < 1e-12);
  }
}

TEST_CASE("compose_scale substitutes lambda r") {
  BoundarySeries a = from_coeffs({1, 2, 3, 4}, 3);
  BoundarySeries s = compose_scale(a, 0.5);
  CHECK(at(s, 0) == doctest::Approx(1.0));
  CHECK(at(s, 1) == doctest::Approx(1.0));
  CHECK(at(s, 2) == doctest::Approx(0.75));
  CHECK(at(s, 3) == doctest::Approx(0.5));
}

TEST_CASE("derivative and monomial shift") {
  BoundarySeries a = from_coeffs({1, 2, 3, 4}, 3);
  BoundarySeries d = a.derivative_r();
  CHECK(at(d, 0) == doctest::Approx(2.0));
  CHECK(at(d, 1) == doctest::Approx(6.0));
  CHECK(at(d, 2) == doctest::Approx(12.0));
  CHECK(at(d, 3) == doctest::Approx(0.0));  // exact polynomial keeps order

  BoundarySeries up = a.shifted_up(2);
  CHECK(at(up, 0) == doctest::Approx(0.0));
  CHECK(at(up, 2) == doctest::Approx(1.0));
  CHECK(at(up, 3) == doctest::Approx(2.0));
}

TEST_CASE("domain and order errors") {
  BoundarySeries zero0 = from_coeffs({0, 1}, 4);
  CHECK_THROWS_AS(recip(zero0), Error);
  BoundarySeries neg = from_coeffs({-1, 0}, 4);
  CHECK_THROWS_AS(sqrt_series(neg), Error);
  CHECK_THROWS_AS(log_series(neg), Error);

  BoundarySeries a = from_coeffs({1, 1}, 4);
  BoundarySeries b = from_coeffs({1, 1}, 6);
  CHECK_THROWS_AS(a * b, Error);

  // reads past the trusted order throw
  BoundarySeries rec = recip(from_coeffs({2, 1}, 4));
  BoundarySeries d = rec.derivative_r();  // trusted order drops to 3
  CHECK(d.order() == 3);
  CHECK_THROWS_AS(d.coeff(4), Error);
}

TEST_CASE("tangential derivatives on a periodic grid") {
  auto chart = std::make_shared<BoundaryChart>();
  chart->shape = {128};
  chart->lo = {0.0};
  chart->hi = {2 * 3.14159265358979323846};
  chart->stencil = BoundaryChart::Stencil::Periodic;

  BoundaryField f = BoundaryField::sampled(
      chart, [](std::span<const double> x) { return std::sin(x[0]); });
  BoundaryField df = f.derivative(0);
  for (int i = 0; i < f.nodes(); ++i) {
    double x = chart->coords(i)[0];
    CHECK(std::abs(df[i] - std::cos(x)) < 5e-4);  // O(h^2)
  }

  BoundarySeries s = BoundarySeries::monomial(f, 1, 3);
  BoundarySeries ds = s.tangential_derivative(0);
  for (int i = 0; i < f.nodes(); ++i)
    CHECK(ds.coeff(1)[i] == doctest::Approx(df[i]));
}

}  // TEST_SUITE
