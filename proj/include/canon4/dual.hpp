#pragma once

#include <array>
#include <cmath>
#include <type_traits>

namespace canon4 {

/// Forward-mode dual number carrying a gradient with respect to (u, v).
///
/// Nesting `Dual<Dual<...>>` gives higher derivatives: every level seeds the
/// same two directions, so `x.d[0].d[1]` of a twice-nested variable is the
/// mixed second partial. Three levels give the full 3-jet of a scalar field.
template <class T>
struct Dual {
  T v{};
  std::array<T, 2> d{};

  constexpr Dual() = default;
  constexpr Dual(double c) : v(c) {}  // NOLINT(google-explicit-constructor)
  constexpr Dual(T value, T du, T dv) : v(std::move(value)), d{std::move(du), std::move(dv)} {}
};

template <class T>
struct is_dual : std::false_type {};
template <class T>
struct is_dual<Dual<T>> : std::true_type {};

template <class T>
inline constexpr int dual_depth = 0;
template <class T>
inline constexpr int dual_depth<Dual<T>> = 1 + dual_depth<T>;

/// Innermost real value.
inline double scalar(double x) { return x; }
template <class T>
double scalar(const Dual<T>& x) {
  return scalar(x.v);
}

/// Independent variable `value` seeded in direction `dir` (0 = u, 1 = v) at
/// every nesting level of T.
template <class T>
T make_variable(double value, int dir) {
  if constexpr (std::is_same_v<T, double>) {
    return value;
  } else {
    using Inner = decltype(T{}.v);
    T x;
    x.v = make_variable<Inner>(value, dir);
    x.d[dir] = Inner(1.0);
    x.d[1 - dir] = Inner(0.0);
    return x;
  }
}

/// Lift a constant into T (all derivatives zero).
template <class T>
T constant(double c) {
  return T(c);
}

inline bool all_finite(double x) { return std::isfinite(x); }
template <class T>
bool all_finite(const Dual<T>& x) {
  return all_finite(x.v) && all_finite(x.d[0]) && all_finite(x.d[1]);
}

// Partial derivatives, one level down.
template <class T>
const T& du(const Dual<T>& x) {
  return x.d[0];
}
template <class T>
const T& dv(const Dual<T>& x) {
  return x.d[1];
}
template <class T>
const T& value(const Dual<T>& x) {
  return x.v;
}

// --- arithmetic --------------------------------------------------------------

template <class T>
Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) {
  return {a.v + b.v, a.d[0] + b.d[0], a.d[1] + b.d[1]};
}
template <class T>
Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) {
  return {a.v - b.v, a.d[0] - b.d[0], a.d[1] - b.d[1]};
}
template <class T>
Dual<T> operator-(const Dual<T>& a) {
  return {-a.v, -a.d[0], -a.d[1]};
}
template <class T>
Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) {
  return {a.v * b.v, a.d[0] * b.v + a.v * b.d[0], a.d[1] * b.v + a.v * b.d[1]};
}
template <class T>
Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
  T inv = T(1.0) / b.v;
  T q = a.v * inv;
  return {q, (a.d[0] - q * b.d[0]) * inv, (a.d[1] - q * b.d[1]) * inv};
}

template <class T>
Dual<T> operator+(const Dual<T>& a, double c) {
  return {a.v + c, a.d[0], a.d[1]};
}
template <class T>
Dual<T> operator+(double c, const Dual<T>& a) {
  return a + c;
}
template <class T>
Dual<T> operator-(const Dual<T>& a, double c) {
  return {a.v - c, a.d[0], a.d[1]};
}
template <class T>
Dual<T> operator-(double c, const Dual<T>& a) {
  return {c - a.v, -a.d[0], -a.d[1]};
}
template <class T>
Dual<T> operator*(const Dual<T>& a, double c) {
  return {a.v * c, a.d[0] * c, a.d[1] * c};
}
template <class T>
Dual<T> operator*(double c, const Dual<T>& a) {
  return a * c;
}
template <class T>
Dual<T> operator/(const Dual<T>& a, double c) {
  return a * (1.0 / c);
}
template <class T>
Dual<T> operator/(double c, const Dual<T>& a) {
  return Dual<T>(c) / a;
}

template <class T>
Dual<T>& operator+=(Dual<T>& a, const Dual<T>& b) {
  return a = a + b;
}
template <class T>
Dual<T>& operator-=(Dual<T>& a, const Dual<T>& b) {
  return a = a - b;
}
template <class T>
Dual<T>& operator*=(Dual<T>& a, const Dual<T>& b) {
  return a = a * b;
}

// --- elementary functions ----------------------------------------------------
// Each rule is f(a) = f(a.v) + f'(a.v) * a.d, with f' evaluated at the inner
// type so that nesting propagates higher derivatives.

namespace detail {
template <class T>
Dual<T> chain(T fv, const T& fprime, const Dual<T>& a) {
  return {std::move(fv), fprime * a.d[0], fprime * a.d[1]};
}
}  // namespace detail

template <class T>
Dual<T> sin(const Dual<T>& a) {
  using std::cos;
  using std::sin;
  return detail::chain(sin(a.v), cos(a.v), a);
}
template <class T>
Dual<T> cos(const Dual<T>& a) {
  using std::cos;
  using std::sin;
  return detail::chain(cos(a.v), -sin(a.v), a);
}
template <class T>
Dual<T> sinh(const Dual<T>& a) {
  using std::cosh;
  using std::sinh;
  return detail::chain(sinh(a.v), cosh(a.v), a);
}
template <class T>
Dual<T> cosh(const Dual<T>& a) {
  using std::cosh;
  using std::sinh;
  return detail::chain(cosh(a.v), sinh(a.v), a);
}
template <class T>
Dual<T> tanh(const Dual<T>& a) {
  using std::tanh;
  T t = tanh(a.v);
  T dt = 1.0 - t * t;
  return detail::chain(std::move(t), dt, a);
}
template <class T>
Dual<T> exp(const Dual<T>& a) {
  using std::exp;
  T e = exp(a.v);
  return detail::chain(e, e, a);
}
template <class T>
Dual<T> log(const Dual<T>& a) {
  using std::log;
  return detail::chain(log(a.v), 1.0 / a.v, a);
}
template <class T>
Dual<T> sqrt(const Dual<T>& a) {
  using std::sqrt;
  T r = sqrt(a.v);
  return detail::chain(r, 0.5 / r, a);
}
/// sign(x) * x; callers reject x == 0.
template <class T>
Dual<T> abs(const Dual<T>& a) {
  return scalar(a) < 0.0 ? -a : a;
}
template <class T>
Dual<T> pow(const Dual<T>& a, double p) {
  using std::pow;
  if (p == 0.0) return Dual<T>(1.0);
  return detail::chain(pow(a.v, p), p * pow(a.v, p - 1.0), a);
}

}  // namespace canon4
