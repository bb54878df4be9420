#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <string_view>

#include "canon4/dual.hpp"
#include "canon4/error.hpp"

namespace canon4 {

enum class Op {
  Number,
  Constant,  // named: pi, e
  VarU,
  VarV,
  Neg,
  Add,
  Sub,
  Mul,
  Div,
  Pow,  // exponent subtree is variable-free
  Sin,
  Cos,
  Sinh,
  Cosh,
  Tanh,
  Exp,
  Ln,
  Sqrt,
  Abs,
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Op op = Op::Number;
  double number = 0.0;  // Number and Constant
  std::string name;     // Constant
  NodePtr lhs;          // unary operand / left operand
  NodePtr rhs;          // right operand
};

/// Immutable scalar expression in u and v.
class Expression {
 public:
  Expression();  // the literal 0
  explicit Expression(NodePtr root);

  const Node& root() const { return *root_; }
  const NodePtr& root_ptr() const { return root_; }

  static Expression number(double c);
  static Expression u();
  static Expression v();

  friend Expression operator+(const Expression& a, const Expression& b);
  friend Expression operator-(const Expression& a, const Expression& b);
  friend Expression operator*(const Expression& a, const Expression& b);
  friend Expression operator/(const Expression& a, const Expression& b);
  friend Expression operator-(const Expression& a);

 private:
  NodePtr root_;
};

/// Infix grammar, see docs/expression-grammar.md.
Expression parse(std::string_view source);

/// Fully parenthesised text that parses back to the same tree.
std::string to_string(const Expression& e);

bool structurally_equal(const Expression& a, const Expression& b);

/// True if the subtree references u or v.
bool depends_on_uv(const Node& n);

/// Replace u and v by the given expressions.
Expression substitute(const Expression& e, const Expression& u_by, const Expression& v_by);

/// The 3-jet of a scalar field at a point. Mixed partials are stored once.
struct Jet3 {
  double value = 0.0;
  double du = 0.0, dv = 0.0;
  double duu = 0.0, duv = 0.0, dvv = 0.0;
  double duuu = 0.0, duuv = 0.0, duvv = 0.0, dvvv = 0.0;
};

using D1 = Dual<double>;
using D2 = Dual<D1>;
using D3 = Dual<D2>;
using D4 = Dual<D3>;

namespace detail {

[[noreturn]] void throw_domain(const char* what, double u, double v);

template <class T>
T eval_node(const Node& n, const T& u, const T& v, double pu, double pv) {
  using std::abs;
  using std::cos;
  using std::cosh;
  using std::exp;
  using std::log;
  using std::pow;
  using std::sin;
  using std::sinh;
  using std::sqrt;
  using std::tanh;
  switch (n.op) {
    case Op::Number:
    case Op::Constant:
      return constant<T>(n.number);
    case Op::VarU:
      return u;
    case Op::VarV:
      return v;
    case Op::Neg:
      return -eval_node(*n.lhs, u, v, pu, pv);
    case Op::Add:
      return eval_node(*n.lhs, u, v, pu, pv) + eval_node(*n.rhs, u, v, pu, pv);
    case Op::Sub:
      return eval_node(*n.lhs, u, v, pu, pv) - eval_node(*n.rhs, u, v, pu, pv);
    case Op::Mul:
      return eval_node(*n.lhs, u, v, pu, pv) * eval_node(*n.rhs, u, v, pu, pv);
    case Op::Div: {
      T den = eval_node(*n.rhs, u, v, pu, pv);
      if (scalar(den) == 0.0) throw_domain("division by zero", pu, pv);
      return eval_node(*n.lhs, u, v, pu, pv) / den;
    }
    case Op::Pow: {
      T base = eval_node(*n.lhs, u, v, pu, pv);
      double p = eval_node<double>(*n.rhs, 0.0, 0.0, pu, pv);
      double b = scalar(base);
      if (b < 0.0 && p != std::floor(p)) throw_domain("negative base with non-integer exponent", pu, pv);
      if (b == 0.0 && p < 0.0) throw_domain("zero base with negative exponent", pu, pv);
      return pow(base, p);
    }
    case Op::Sin:
      return sin(eval_node(*n.lhs, u, v, pu, pv));
    case Op::Cos:
      return cos(eval_node(*n.lhs, u, v, pu, pv));
    case Op::Sinh:
      return sinh(eval_node(*n.lhs, u, v, pu, pv));
    case Op::Cosh:
      return cosh(eval_node(*n.lhs, u, v, pu, pv));
    case Op::Tanh:
      return tanh(eval_node(*n.lhs, u, v, pu, pv));
    case Op::Exp:
      return exp(eval_node(*n.lhs, u, v, pu, pv));
    case Op::Ln: {
      T a = eval_node(*n.lhs, u, v, pu, pv);
      if (scalar(a) <= 0.0) throw_domain("ln of non-positive value", pu, pv);
      return log(a);
    }
    case Op::Sqrt: {
      T a = eval_node(*n.lhs, u, v, pu, pv);
      if (scalar(a) < 0.0) throw_domain("sqrt of negative value", pu, pv);
      if (scalar(a) == 0.0 && dual_depth<T> > 0) throw_domain("sqrt is not differentiable at 0", pu, pv);
      return sqrt(a);
    }
    case Op::Abs: {
      T a = eval_node(*n.lhs, u, v, pu, pv);
      if (scalar(a) == 0.0) throw_domain("abs evaluated at 0", pu, pv);
      return abs(a);
    }
  }
  throw_domain("corrupt expression node", pu, pv);
}

}  // namespace detail

/// Evaluate at arbitrary (possibly nested-dual) arguments. Non-finite results
/// raise a domain error.
template <class T>
  requires(is_dual<T>::value || std::is_same_v<T, double>)
T evaluate(const Expression& e, const T& u, const T& v) {
  const double pu = scalar(u);
  const double pv = scalar(v);
  T r = detail::eval_node(e.root(), u, v, pu, pv);
  if (!all_finite(r)) detail::throw_domain("non-finite value", pu, pv);
  return r;
}

/// Evaluate with u, v seeded as independent variables of type T.
template <class T>
T evaluate_seeded(const Expression& e, double u, double v) {
  return evaluate(e, make_variable<T>(u, 0), make_variable<T>(v, 1));
}

double evaluate(const Expression& e, double u, double v);

Jet3 eval_jet3(const Expression& e, double u, double v);

}  // namespace canon4
