#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmcfol/expr.hpp"
#include "cmcfol/linalg.hpp"

namespace cmcfol {

// A single coordinate chart with an open-box domain. Bounds may be infinite.
// The excluded locus is purely informational (e.g. "origin"); operations near
// it fail through their own guards (gradient threshold, Cholesky).
struct Chart {
  int dim = 0;
  Vec lo, hi;
  std::string excluded_locus;
  std::vector<std::string> var_names;  // optional; empty = defaults

  static Chart box(int n, double lo_all, double hi_all);
  static Chart unbounded(int n);

  bool contains(std::span<const double> p) const;
  void require_inside(std::span<const double> p) const;
};

// Scalar field on a chart: value plus exact or finite-difference second jet.
class ScalarField {
public:
  using ValueFn = std::function<double(std::span<const double>)>;
  using JetFn = std::function<Jet2(std::span<const double>)>;

  ScalarField() = default;
  explicit ScalarField(Expression e);

  static ScalarField analytic(int dim, ValueFn value, JetFn jet);
  // Jets from central differences of `value`; step is scaled per coordinate.
  static ScalarField finite_difference(int dim, ValueFn value,
                                       double step = 1e-4);

  double operator()(std::span<const double> p) const { return value_(p); }
  Jet2 jet(std::span<const double> p) const { return jet_(p); }
  int dim() const { return dim_; }
  bool valid() const { return bool(value_); }

  const std::optional<Expression>& expression() const { return expr_; }

private:
  int dim_ = 0;
  ValueFn value_;
  JetFn jet_;
  std::optional<Expression> expr_;
};

enum class MetricBackend { Analytic, FiniteDifference };

// Riemannian metric on a chart, given by n*n scalar-field entries. Every
// evaluation symmetrizes and runs a Cholesky positive-definiteness check;
// an indefinite metric is a hard error, never a warning.
class MetricField {
public:
  MetricField() = default;
  MetricField(Chart chart, std::vector<ScalarField> entries,
              MetricBackend backend = MetricBackend::Analytic,
              double fd_step = 1e-4);

  static MetricField from_expressions(Chart chart,
                                      const std::vector<std::string>& entries,
                                      MetricBackend backend = MetricBackend::Analytic,
                                      double fd_step = 1e-4);
  static MetricField euclidean(Chart chart);

  int dim() const { return chart_.dim; }
  const Chart& chart() const { return chart_; }
  MetricBackend backend() const { return backend_; }
  double fd_step() const { return fd_step_; }
  const std::vector<ScalarField>& entries() const { return entries_; }

  Mat value(std::span<const double> p) const;
  Mat inverse(std::span<const double> p) const;

  // dg(c, a, b) = d_c g_ab; exact for the analytic backend, central
  // differences otherwise.
  Tensor3 partials(std::span<const double> p) const;

  // Same metric with derivatives taken by finite differences only.
  MetricField with_fd_backend(double step = 1e-4) const;

  // e^{2 omega} g. When both omega and all entries are expression-backed the
  // result is analytic; otherwise it falls back to the FD backend.
  MetricField conformally_scaled(const ScalarField& omega) const;

private:
  Chart chart_;
  std::vector<ScalarField> entries_;  // row-major n*n
  MetricBackend backend_ = MetricBackend::Analytic;
  double fd_step_ = 1e-4;

  Mat value_unchecked(std::span<const double> p) const;
  friend Tensor3 christoffel(const MetricField&, std::span<const double>);
  friend double scalar_curvature(const MetricField&, std::span<const double>);
};

// Christoffel symbols Gamma^a_{bc} of the Levi-Civita connection.
Tensor3 christoffel(const MetricField& g, std::span<const double> p);

// nabla_a nabla_b f = d_a d_b f - Gamma^c_{ab} d_c f
Mat covariant_hessian(const MetricField& g, const ScalarField& f,
                      std::span<const double> p);
Mat covariant_hessian(const MetricField& g, const Jet2& fjet,
                      std::span<const double> p);

double laplacian(const MetricField& g, const ScalarField& f,
                 std::span<const double> p);

// |u|_g = sqrt(g^{-1}(u, u)) for a covector u.
double covector_norm(const MetricField& g, std::span<const double> u,
                     std::span<const double> p);

// Ricci scalar.
double scalar_curvature(const MetricField& g, std::span<const double> p);

}  // namespace cmcfol
