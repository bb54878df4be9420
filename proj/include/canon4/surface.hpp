#pragma once

#include <string>
#include <utility>

#include "canon4/expr.hpp"
#include "canon4/lattice.hpp"
#include "canon4/vec.hpp"

namespace canon4 {

/// Numerical thresholds shared by every module. All are overridable from the CLI.
struct Tolerances {
  double eps_det = 1e-12;        // EG - F^2 floor
  double eps_min = 1e-9;         // |H| floor (minimal points)
  double tol_principal = 1e-8;   // F and M residual for principal charts
  double eps_denom = 1e-10;      // f-field denominator floor
  double tol_canon = 1e-6;       // |phi - 1|, |psi - 1|
  double tol_spread = 1e-6;      // v-independence of phi (u-independence of psi)
  double tol_compat = 1e-6;      // normalized compatibility residual
  double tol_residual = 1e-6;    // six-equation residual for `check`
  double tol_drift = 1e-3;       // frame orthonormality drift before projection
  double blowup = 1e8;           // position norm treated as blow-up

  /// Set a field by name; returns false for unknown names.
  bool set(const std::string& name, double value);
};

/// A surface patch z(u, v) in R^4 given by four expressions.
struct Chart {
  std::string name;
  std::array<Expression, 4> coords;
  Domain domain;
  int orientation = 1;
};

/// Position and derivatives of the chart up to order two, each component of type S.
template <class S>
struct ChartDerivs {
  V4<S> z, zu, zv, zuu, zuv, zvv;
};

/// Evaluates the chart at T = Dual<Dual<S>> so that nested levels below S carry
/// derivatives of the returned quantities.
template <class S>
ChartDerivs<S> chart_derivs(const Chart& chart, double u, double v) {
  using T = Dual<Dual<S>>;
  ChartDerivs<S> d;
  const T tu = make_variable<T>(u, 0);
  const T tv = make_variable<T>(v, 1);
  for (int k = 0; k < 4; ++k) {
    const T r = evaluate(chart.coords[k], tu, tv);
    d.z[k] = r.v.v;
    d.zu[k] = r.d[0].v;
    d.zv[k] = r.d[1].v;
    d.zuu[k] = r.d[0].d[0];
    d.zuv[k] = r.d[0].d[1];
    d.zvv[k] = r.d[1].d[1];
  }
  return d;
}

struct FundamentalForms {
  double E = 0, F = 0, G = 0;
  Vec4 sigma_uu{}, sigma_uv{}, sigma_vv{};
  double L = 0, M = 0, N = 0;
  /// c[k][m] = <sigma_m, n_{k+1}> with m = 0 (uu), 1 (uv), 2 (vv).
  std::array<std::array<double, 3>, 2> c{};
  std::array<Vec4, 2> normals{};
  /// christoffel[k][m] = Gamma^{k+1}_m with m as for c.
  std::array<std::array<double, 3>, 2> christoffel{};
};

struct Invariants {
  double k = 0, varkappa = 0, K = 0;
  Vec4 H{};
  double H_norm = 0;
};

struct Frame {
  Vec4 x{}, y{}, b{}, l{};
};

/// Metric, normal part of the second derivatives and the mean curvature vector, at scalar type S.
template <class S>
struct PointGeometry {
  S E, F, G, W;
  V4<S> zu, zv, suu, suv, svv, H;
};

template <class S>
PointGeometry<S> point_geometry(const ChartDerivs<S>& d) {
  PointGeometry<S> g;
  g.zu = d.zu;
  g.zv = d.zv;
  g.E = dot(d.zu, d.zu);
  g.F = dot(d.zu, d.zv);
  g.G = dot(d.zv, d.zv);
  g.W = g.E * g.G - g.F * g.F;
  auto normal_part = [&](const V4<S>& w) {
    const S a = dot(w, d.zu);
    const S b = dot(w, d.zv);
    const S g1 = (g.G * a - g.F * b) / g.W;
    const S g2 = (g.E * b - g.F * a) / g.W;
    return sub(w, add(scale(g1, d.zu), scale(g2, d.zv)));
  };
  g.suu = normal_part(d.zuu);
  g.suv = normal_part(d.zuv);
  g.svv = normal_part(d.zvv);
  const S two_w = 2.0 * g.W;
  g.H = add(add(scale(g.G / two_w, g.suu), scale(-2.0 * g.F / two_w, g.suv)), scale(g.E / two_w, g.svv));
  return g;
}

/// Geometric frame {x, y, b, l} at scalar type S; l = orientation * cross(x, y, b).
template <class S>
struct FrameT {
  V4<S> x, y, b, l;
  S sqrtE, sqrtG;
};

template <class S>
FrameT<S> frame_from(const PointGeometry<S>& g, int orientation) {
  using std::sqrt;
  FrameT<S> f;
  f.sqrtE = sqrt(g.E);
  f.sqrtG = sqrt(g.G);
  f.x = scale(1.0 / f.sqrtE, g.zu);
  f.y = scale(1.0 / f.sqrtG, g.zv);
  const S hn = sqrt(dot(g.H, g.H));
  f.b = scale(1.0 / hn, g.H);
  const V4<S> c = cross3(f.x, f.y, f.b);
  const S cn = sqrt(dot(c, c));
  f.l = scale(static_cast<double>(orientation) / cn, c);
  return f;
}

/// Forms at a point. Throws DegenerateMetric when EG - F^2 <= eps_det.
FundamentalForms fundamental_forms(const Chart& chart, double u, double v, const Tolerances& tol = {});

Invariants invariants(const FundamentalForms& forms);

/// Throws DegenerateMetric, MinimalPoint or NonPrincipal.
Frame geometric_frame(const Chart& chart, double u, double v, const Tolerances& tol = {});

/// Principal residual at one point: max(|F|/sqrt(EG), |M|/sqrt(EG - F^2)).
double principal_residual(const FundamentalForms& forms);

struct PrincipalCheck {
  bool principal = false;
  double max_residual = 0.0;
};

PrincipalCheck is_principal(const Chart& chart, const Lattice& lattice, const Tolerances& tol = {});

/// The chart with every coordinate multiplied by alpha.
Chart scaled(const Chart& chart, double alpha);

}  // namespace canon4
