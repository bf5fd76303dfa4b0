#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cmcfol/error.hpp"
#include "cmcfol/linalg.hpp"

namespace cmcfol {

// Second-order jet of a scalar function at a point: value, coordinate
// gradient and coordinate Hessian. The Hessian is stored as the packed upper
// triangle, so symmetry holds by construction.
struct Jet2 {
  double v = 0.0;
  Vec g;     // size n
  Vec h;     // packed upper triangle, size n(n+1)/2

  Jet2() = default;
  explicit Jet2(int n) : g(n, 0.0), h(std::size_t(n) * (n + 1) / 2, 0.0) {}

  int dim() const { return int(g.size()); }

  static std::size_t tri_index(int n, int i, int j) {
    if (i > j) std::swap(i, j);
    return std::size_t(i) * n - std::size_t(i) * (i - 1) / 2 + (j - i);
  }

  double hess(int i, int j) const { return h[tri_index(dim(), i, j)]; }
  double& hess_ref(int i, int j) { return h[tri_index(dim(), i, j)]; }

  Mat hess_matrix() const {
    int n = dim();
    Mat m(n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        m(i, j) = hess(i, j);
        m(j, i) = m(i, j);
      }
    return m;
  }
};

// A parsed analytic expression over chart variables x1..xn. Immutable after
// parse; evaluation is pure, so instances may be shared across threads.
//
// Grammar (documented in the README):
//   expr   := term (('+'|'-') term)*
//   term   := unary (('*'|'/') unary)*
//   unary  := ('+'|'-')* power
//   power  := atom ('^' unary)?
//   atom   := number | 'pi' | var | fn '(' expr (',' expr)* ')' | '(' expr ')'
// Functions: sin cos exp log sqrt atan atan2. No implicit multiplication.
// '^' with a non-integer exponent requires a positive base; integer literal
// exponents are evaluated by repeated multiplication.
class Expression {
public:
  enum class Op : std::uint8_t {
    Const, Var, Neg,
    Add, Sub, Mul, Div, Pow,
    Sin, Cos, Exp, Log, Sqrt, Atan, Atan2
  };

  struct Node {
    Op op;
    double value = 0.0;  // Const
    int var = -1;        // Var
    int a = -1, b = -1;  // children
    std::uint32_t pos = 0, end = 0;  // source byte span
  };

  // `names` optionally supplies variable names (one per variable). When
  // empty, variables are x1..xn, plus the positional aliases x,y,z,t when
  // n <= 4.
  static Expression parse(std::string_view source, int n_vars,
                          std::span<const std::string> names = {});

  double eval(std::span<const double> p) const;
  Jet2 eval_jet2(std::span<const double> p) const;

  // Prints a string that re-parses to a structurally identical tree.
  std::string print() const;

  int n_vars() const { return n_vars_; }
  const std::string& source() const { return source_; }
  const std::vector<std::string>& var_names() const { return var_names_; }

  // Programmatic constructors, used by the corpus and by tests.
  static Expression constant(double v, int n_vars);
  static Expression variable(int index, int n_vars);

private:
  friend class ExprParser;
  std::string source_;
  std::vector<Node> nodes_;  // children precede parents
  int root_ = -1;
  int n_vars_ = 0;
  std::vector<std::string> var_names_;

  std::string node_text(const Node& n) const;
  void print_node(int idx, int parent_prec, bool right_slot,
                  std::string& out) const;
};

}  // namespace cmcfol
