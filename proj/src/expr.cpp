#include "cmcfol/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>

namespace cmcfol {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---- jet algebra -----------------------------------------------------------

Jet2 jet_const(double v, int n) {
  Jet2 j(n);
  j.v = v;
  return j;
}

Jet2 jet_var(int idx, double v, int n) {
  Jet2 j(n);
  j.v = v;
  j.g[idx] = 1.0;
  return j;
}

Jet2 jet_add(const Jet2& a, const Jet2& b, double sb) {
  Jet2 r = a;
  r.v += sb * b.v;
  for (std::size_t i = 0; i < r.g.size(); ++i) r.g[i] += sb * b.g[i];
  for (std::size_t i = 0; i < r.h.size(); ++i) r.h[i] += sb * b.h[i];
  return r;
}

Jet2 jet_neg(const Jet2& a) {
  Jet2 r = a;
  r.v = -r.v;
  for (double& x : r.g) x = -x;
  for (double& x : r.h) x = -x;
  return r;
}

Jet2 jet_mul(const Jet2& a, const Jet2& b) {
  int n = a.dim();
  Jet2 r(n);
  r.v = a.v * b.v;
  for (int i = 0; i < n; ++i) r.g[i] = a.g[i] * b.v + b.g[i] * a.v;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      r.hess_ref(i, j) = a.hess(i, j) * b.v + b.hess(i, j) * a.v +
                         a.g[i] * b.g[j] + a.g[j] * b.g[i];
  return r;
}

Jet2 jet_div(const Jet2& a, const Jet2& b) {
  int n = a.dim();
  Jet2 r(n);
  r.v = a.v / b.v;
  for (int i = 0; i < n; ++i) r.g[i] = (a.g[i] - r.v * b.g[i]) / b.v;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      r.hess_ref(i, j) = (a.hess(i, j) - r.v * b.hess(i, j) -
                          r.g[i] * b.g[j] - r.g[j] * b.g[i]) / b.v;
  return r;
}

// h = f(u) with f1 = f'(u), f2 = f''(u)
Jet2 jet_unary(const Jet2& u, double fv, double f1, double f2) {
  int n = u.dim();
  Jet2 r(n);
  r.v = fv;
  for (int i = 0; i < n; ++i) r.g[i] = f1 * u.g[i];
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      r.hess_ref(i, j) = f1 * u.hess(i, j) + f2 * u.g[i] * u.g[j];
  return r;
}

// h = f(u, v) given value and first/second partials of f
Jet2 jet_binary(const Jet2& u, const Jet2& v, double fv, double fu, double fvv_,
                double fuu, double fuv, double fvv2) {
  int n = u.dim();
  Jet2 r(n);
  r.v = fv;
  for (int i = 0; i < n; ++i) r.g[i] = fu * u.g[i] + fvv_ * v.g[i];
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      r.hess_ref(i, j) = fu * u.hess(i, j) + fvv_ * v.hess(i, j) +
                         fuu * u.g[i] * u.g[j] +
                         fuv * (u.g[i] * v.g[j] + u.g[j] * v.g[i]) +
                         fvv2 * v.g[i] * v.g[j];
  return r;
}

Jet2 jet_int_pow(const Jet2& base, long k) {
  int n = base.dim();
  if (k == 0) return jet_const(1.0, n);
  bool neg = k < 0;
  unsigned long e = neg ? -(unsigned long)k : (unsigned long)k;
  Jet2 acc = jet_const(1.0, n);
  Jet2 sq = base;
  while (e) {
    if (e & 1) acc = jet_mul(acc, sq);
    e >>= 1;
    if (e) sq = jet_mul(sq, sq);
  }
  if (neg) return jet_div(jet_const(1.0, n), acc);
  return acc;
}

double int_pow_value(double x, long k) {
  if (k == 0) return 1.0;
  bool neg = k < 0;
  unsigned long e = neg ? -(unsigned long)k : (unsigned long)k;
  double acc = 1.0, sq = x;
  while (e) {
    if (e & 1) acc *= sq;
    e >>= 1;
    if (e) sq *= sq;
  }
  return neg ? 1.0 / acc : acc;
}

// Returns the exponent when the node is an integer literal small enough for
// the repeated-multiplication path.
std::optional<long> integer_exponent(const Expression::Node& n) {
  if (n.op != Expression::Op::Const) return std::nullopt;
  double v = n.value;
  if (!std::isfinite(v) || v != std::floor(v) || std::abs(v) > 1e9)
    return std::nullopt;
  return long(v);
}

const char* op_name(Expression::Op op) {
  switch (op) {
    case Expression::Op::Const: return "constant";
    case Expression::Op::Var: return "variable";
    case Expression::Op::Neg: return "negation";
    case Expression::Op::Add: return "+";
    case Expression::Op::Sub: return "-";
    case Expression::Op::Mul: return "*";
    case Expression::Op::Div: return "/";
    case Expression::Op::Pow: return "^";
    case Expression::Op::Sin: return "sin";
    case Expression::Op::Cos: return "cos";
    case Expression::Op::Exp: return "exp";
    case Expression::Op::Log: return "log";
    case Expression::Op::Sqrt: return "sqrt";
    case Expression::Op::Atan: return "atan";
    case Expression::Op::Atan2: return "atan2";
  }
  return "?";
}

}  // namespace

// ---- parser ----------------------------------------------------------------

class ExprParser {
public:
  ExprParser(std::string_view src, int n_vars,
             std::span<const std::string> names)
      : src_(src) {
    if (n_vars < 1) throw_usage("n_vars must be >= 1");
    expr_.source_ = std::string(src);
    expr_.n_vars_ = n_vars;
    if (!names.empty()) {
      if (int(names.size()) != n_vars)
        throw_usage("variable name list does not match variable count");
      for (int i = 0; i < n_vars; ++i) {
        expr_.var_names_.push_back(names[i]);
        name_to_var_[names[i]] = i;
      }
    } else {
      static const char* alias[] = {"x", "y", "z", "t"};
      for (int i = 0; i < n_vars; ++i)
        expr_.var_names_.push_back("x" + std::to_string(i + 1));
      if (n_vars <= 4)
        for (int i = 0; i < n_vars; ++i) name_to_var_[alias[i]] = i;
    }
    // Canonical names are always accepted.
    for (int i = 0; i < n_vars; ++i)
      name_to_var_["x" + std::to_string(i + 1)] = i;
  }

  Expression run() {
    skip_ws();
    int root = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) fail("end of input");
    expr_.root_ = root;
    return std::move(expr_);
  }

private:
  std::string_view src_;
  std::size_t pos_ = 0;
  Expression expr_;
  std::map<std::string, int, std::less<>> name_to_var_;

  [[noreturn]] void fail(const std::string& expected) {
    throw ParseError(pos_, expected,
                     "syntax error at offset " + std::to_string(pos_) +
                         ": expected " + expected);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace((unsigned char)src_[pos_])) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  int add_node(Expression::Node n) {
    expr_.nodes_.push_back(n);
    return int(expr_.nodes_.size()) - 1;
  }

  int make_binary(Expression::Op op, int a, int b) {
    Expression::Node n;
    n.op = op;
    n.a = a;
    n.b = b;
    n.pos = expr_.nodes_[a].pos;
    n.end = expr_.nodes_[b].end;
    return add_node(n);
  }

  int parse_expr() {
    int lhs = parse_term();
    while (true) {
      char c = peek();
      if (c == '+' || c == '-') {
        ++pos_;
        int rhs = parse_term();
        lhs = make_binary(c == '+' ? Expression::Op::Add : Expression::Op::Sub,
                          lhs, rhs);
      } else {
        return lhs;
      }
    }
  }

  int parse_term() {
    int lhs = parse_unary();
    while (true) {
      char c = peek();
      if (c == '*' || c == '/') {
        ++pos_;
        int rhs = parse_unary();
        lhs = make_binary(c == '*' ? Expression::Op::Mul : Expression::Op::Div,
                          lhs, rhs);
      } else {
        return lhs;
      }
    }
  }

  int parse_unary() {
    skip_ws();
    std::size_t start = pos_;
    if (eat('+')) return parse_unary();
    if (eat('-')) {
      int child = parse_unary();
      // Fold -constant so that integer-literal exponents like x^-2 work and
      // printing round-trips.
      if (expr_.nodes_[child].op == Expression::Op::Const) {
        expr_.nodes_[child].value = -expr_.nodes_[child].value;
        expr_.nodes_[child].pos = std::uint32_t(start);
        return child;
      }
      Expression::Node n;
      n.op = Expression::Op::Neg;
      n.a = child;
      n.pos = std::uint32_t(start);
      n.end = expr_.nodes_[child].end;
      return add_node(n);
    }
    return parse_power();
  }

  int parse_power() {
    int base = parse_atom();
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == '^') {
      ++pos_;
      int exp = parse_unary();  // right-associative
      return make_binary(Expression::Op::Pow, base, exp);
    }
    return base;
  }

  int parse_atom() {
    skip_ws();
    if (pos_ >= src_.size()) fail("a value");
    std::size_t start = pos_;
    char c = src_[pos_];

    if (c == '(') {
      ++pos_;
      int inner = parse_expr();
      if (!eat(')')) fail("')'");
      return inner;
    }

    if (std::isdigit((unsigned char)c) ||
        (c == '.' && pos_ + 1 < src_.size() &&
         std::isdigit((unsigned char)src_[pos_ + 1]))) {
      const char* begin = src_.data() + pos_;
      char* end = nullptr;
      double v = std::strtod(begin, &end);
      if (end == begin) fail("a number");
      pos_ += std::size_t(end - begin);
      Expression::Node n;
      n.op = Expression::Op::Const;
      n.value = v;
      n.pos = std::uint32_t(start);
      n.end = std::uint32_t(pos_);
      return add_node(n);
    }

    if (std::isalpha((unsigned char)c) || c == '_') {
      std::size_t id_start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum((unsigned char)src_[pos_]) || src_[pos_] == '_'))
        ++pos_;
      std::string_view name = src_.substr(id_start, pos_ - id_start);

      if (peek() == '(') {
        Expression::Op op;
        int arity = 1;
        if (name == "sin") op = Expression::Op::Sin;
        else if (name == "cos") op = Expression::Op::Cos;
        else if (name == "exp") op = Expression::Op::Exp;
        else if (name == "log") op = Expression::Op::Log;
        else if (name == "sqrt") op = Expression::Op::Sqrt;
        else if (name == "atan") op = Expression::Op::Atan;
        else if (name == "atan2") { op = Expression::Op::Atan2; arity = 2; }
        else {
          pos_ = id_start;
          throw ParseError(pos_, "a known function",
                           "unknown function '" + std::string(name) +
                               "' at offset " + std::to_string(id_start));
        }
        eat('(');
        int a = parse_expr();
        int b = -1;
        if (arity == 2) {
          if (!eat(',')) fail("','");
          b = parse_expr();
        } else if (peek() == ',') {
          throw ParseError(pos_, "')'",
                           "arity mismatch: '" + std::string(name) +
                               "' takes one argument (offset " +
                               std::to_string(pos_) + ")");
        }
        if (!eat(')')) fail("')'");
        Expression::Node n;
        n.op = op;
        n.a = a;
        n.b = b;
        n.pos = std::uint32_t(id_start);
        n.end = std::uint32_t(pos_);
        return add_node(n);
      }

      if (name == "pi") {
        Expression::Node n;
        n.op = Expression::Op::Const;
        n.value = kPi;
        n.pos = std::uint32_t(id_start);
        n.end = std::uint32_t(pos_);
        return add_node(n);
      }

      auto it = name_to_var_.find(name);
      if (it == name_to_var_.end()) {
        pos_ = id_start;
        throw ParseError(id_start, "a variable name",
                         "unknown identifier '" + std::string(name) +
                             "' at offset " + std::to_string(id_start));
      }
      Expression::Node n;
      n.op = Expression::Op::Var;
      n.var = it->second;
      n.pos = std::uint32_t(id_start);
      n.end = std::uint32_t(pos_);
      return add_node(n);
    }

    fail("a value");
  }
};

Expression Expression::parse(std::string_view source, int n_vars,
                             std::span<const std::string> names) {
  return ExprParser(source, n_vars, names).run();
}

Expression Expression::constant(double v, int n_vars) {
  return parse(format_double(v), n_vars);
}

Expression Expression::variable(int index, int n_vars) {
  return parse("x" + std::to_string(index + 1), n_vars);
}

// ---- evaluation ------------------------------------------------------------

std::string Expression::node_text(const Node& n) const {
  return source_.substr(n.pos, n.end - n.pos);
}

namespace {
[[noreturn]] void domain_fail(const Expression& e, const Expression::Node& n,
                              const std::string& why) {
  throw_domain("domain error in '" + std::string(op_name(n.op)) +
               "' at offset " + std::to_string(n.pos) + " ('" +
               e.source().substr(n.pos, std::min<std::size_t>(24, n.end - n.pos)) +
               "'): " + why);
}
}  // namespace

double Expression::eval(std::span<const double> p) const {
  if (int(p.size()) != n_vars_)
    throw_usage("point dimension does not match expression variable count");
  std::vector<double> val(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    double a = n.a >= 0 ? val[n.a] : 0.0;
    double b = n.b >= 0 ? val[n.b] : 0.0;
    double r = 0.0;
    switch (n.op) {
      case Op::Const: r = n.value; break;
      case Op::Var: r = p[n.var]; break;
      case Op::Neg: r = -a; break;
      case Op::Add: r = a + b; break;
      case Op::Sub: r = a - b; break;
      case Op::Mul: r = a * b; break;
      case Op::Div:
        if (b == 0.0) domain_fail(*this, n, "division by zero");
        r = a / b;
        break;
      case Op::Pow: {
        auto k = integer_exponent(nodes_[n.b]);
        if (k) {
          if (a == 0.0 && *k < 0) domain_fail(*this, n, "zero base with negative exponent");
          r = int_pow_value(a, *k);
        } else {
          if (!(a > 0.0))
            domain_fail(*this, n, "non-integer exponent requires positive base");
          r = std::pow(a, b);
        }
        break;
      }
      case Op::Sin: r = std::sin(a); break;
      case Op::Cos: r = std::cos(a); break;
      case Op::Exp: r = std::exp(a); break;
      case Op::Log:
        if (!(a > 0.0)) domain_fail(*this, n, "log of non-positive value");
        r = std::log(a);
        break;
      case Op::Sqrt:
        if (!(a > 0.0)) domain_fail(*this, n, "sqrt of non-positive value");
        r = std::sqrt(a);
        break;
      case Op::Atan: r = std::atan(a); break;
      case Op::Atan2:
        if (a == 0.0 && b == 0.0) domain_fail(*this, n, "atan2(0, 0)");
        r = std::atan2(a, b);
        break;
    }
    if (!std::isfinite(r)) domain_fail(*this, n, "non-finite result");
    val[i] = r;
  }
  return val[root_];
}

Jet2 Expression::eval_jet2(std::span<const double> p) const {
  if (int(p.size()) != n_vars_)
    throw_usage("point dimension does not match expression variable count");
  int nv = n_vars_;
  std::vector<Jet2> val(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    const Jet2* a = n.a >= 0 ? &val[n.a] : nullptr;
    const Jet2* b = n.b >= 0 ? &val[n.b] : nullptr;
    Jet2 r;
    switch (n.op) {
      case Op::Const: r = jet_const(n.value, nv); break;
      case Op::Var: r = jet_var(n.var, p[n.var], nv); break;
      case Op::Neg: r = jet_neg(*a); break;
      case Op::Add: r = jet_add(*a, *b, +1.0); break;
      case Op::Sub: r = jet_add(*a, *b, -1.0); break;
      case Op::Mul: r = jet_mul(*a, *b); break;
      case Op::Div:
        if (b->v == 0.0) domain_fail(*this, n, "division by zero");
        r = jet_div(*a, *b);
        break;
      case Op::Pow: {
        auto k = integer_exponent(nodes_[n.b]);
        if (k) {
          if (a->v == 0.0 && *k < 0) domain_fail(*this, n, "zero base with negative exponent");
          r = jet_int_pow(*a, *k);
        } else {
          if (!(a->v > 0.0))
            domain_fail(*this, n, "non-integer exponent requires positive base");
          double u = a->v, w = b->v;
          double f = std::pow(u, w);
          double lu = std::log(u);
          r = jet_binary(*a, *b, f,
                         f * w / u, f * lu,
                         f * w * (w - 1.0) / (u * u),
                         f * (w * lu + 1.0) / u,
                         f * lu * lu);
        }
        break;
      }
      case Op::Sin: r = jet_unary(*a, std::sin(a->v), std::cos(a->v), -std::sin(a->v)); break;
      case Op::Cos: r = jet_unary(*a, std::cos(a->v), -std::sin(a->v), -std::cos(a->v)); break;
      case Op::Exp: {
        double e = std::exp(a->v);
        r = jet_unary(*a, e, e, e);
        break;
      }
      case Op::Log:
        if (!(a->v > 0.0)) domain_fail(*this, n, "log of non-positive value");
        r = jet_unary(*a, std::log(a->v), 1.0 / a->v, -1.0 / (a->v * a->v));
        break;
      case Op::Sqrt: {
        if (!(a->v > 0.0)) domain_fail(*this, n, "sqrt of non-positive value");
        double s = std::sqrt(a->v);
        r = jet_unary(*a, s, 0.5 / s, -0.25 / (s * a->v));
        break;
      }
      case Op::Atan: {
        double u = a->v, q = 1.0 + u * u;
        r = jet_unary(*a, std::atan(u), 1.0 / q, -2.0 * u / (q * q));
        break;
      }
      case Op::Atan2: {
        // first child = y, second = x
        double y = a->v, x = b->v, q = x * x + y * y;
        if (q == 0.0) domain_fail(*this, n, "atan2(0, 0)");
        r = jet_binary(*a, *b, std::atan2(y, x),
                       x / q, -y / q,
                       -2.0 * x * y / (q * q),
                       (y * y - x * x) / (q * q),
                       2.0 * x * y / (q * q));
        break;
      }
    }
    if (!std::isfinite(r.v)) domain_fail(*this, n, "non-finite result");
    val[i] = std::move(r);
  }
  return val[root_];
}

// ---- printing --------------------------------------------------------------

namespace {
int precedence(Expression::Op op) {
  switch (op) {
    case Expression::Op::Add:
    case Expression::Op::Sub: return 1;
    case Expression::Op::Mul:
    case Expression::Op::Div: return 2;
    case Expression::Op::Neg: return 3;
    case Expression::Op::Pow: return 4;
    default: return 5;
  }
}
}  // namespace

void Expression::print_node(int idx, int parent_prec, bool right_slot,
                            std::string& out) const {
  const Node& n = nodes_[idx];
  int prec = precedence(n.op);
  bool parens = prec < parent_prec || (prec == parent_prec && right_slot);
  if (parens) out += '(';
  switch (n.op) {
    case Op::Const: out += format_double(n.value); break;
    case Op::Var: out += var_names_[n.var]; break;
    case Op::Neg:
      out += '-';
      print_node(n.a, 4, false, out);  // bind tighter than * but looser than ^
      break;
    case Op::Add:
      print_node(n.a, 1, false, out); out += " + "; print_node(n.b, 1, true, out);
      break;
    case Op::Sub:
      print_node(n.a, 1, false, out); out += " - "; print_node(n.b, 1, true, out);
      break;
    case Op::Mul:
      print_node(n.a, 2, false, out); out += "*"; print_node(n.b, 2, true, out);
      break;
    case Op::Div:
      print_node(n.a, 2, false, out); out += "/"; print_node(n.b, 2, true, out);
      break;
    case Op::Pow:
      print_node(n.a, 5, false, out); out += "^"; print_node(n.b, 4, false, out);
      break;
    default:
      out += op_name(n.op);
      out += '(';
      print_node(n.a, 0, false, out);
      if (n.b >= 0) { out += ", "; print_node(n.b, 0, false, out); }
      out += ')';
      break;
  }
  if (parens) out += ')';
}

std::string Expression::print() const {
  std::string out;
  print_node(root_, 0, false, out);
  return out;
}

}  // namespace cmcfol
