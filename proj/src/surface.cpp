#include "canon4/surface.hpp"

#include <algorithm>
#include <cmath>

namespace canon4 {

bool Tolerances::set(const std::string& name, double value) {
  struct Entry {
    const char* name;
    double Tolerances::*field;
  };
  static const Entry entries[] = {
      {"eps_det", &Tolerances::eps_det},         {"eps_min", &Tolerances::eps_min},
      {"tol_principal", &Tolerances::tol_principal}, {"eps_denom", &Tolerances::eps_denom},
      {"tol_canon", &Tolerances::tol_canon},     {"tol_spread", &Tolerances::tol_spread},
      {"tol_compat", &Tolerances::tol_compat},   {"tol_residual", &Tolerances::tol_residual},
      {"tol_drift", &Tolerances::tol_drift},     {"blowup", &Tolerances::blowup},
  };
  for (const auto& e : entries) {
    if (name == e.name) {
      this->*e.field = value;
      return true;
    }
  }
  return false;
}

namespace {

// Unit normal n1 from sigma_vv (or sigma_uu), n2 completing so that
// det[z_u, z_v, n1, n2] has the sign of the orientation.
std::array<Vec4, 2> normal_pair(const PointGeometry<double>& g, int orientation) {
  const double scale_ref = std::max({1.0, norm(g.suu), norm(g.svv)});
  Vec4 n1{};
  if (norm(g.svv) > 1e-9 * scale_ref) {
    n1 = g.svv;
  } else if (norm(g.suu) > 1e-9 * scale_ref) {
    n1 = g.suu;
  } else {
    // No curvature direction available: take the basis vector farthest from the tangent plane.
    double best = -1.0;
    for (int k = 0; k < 4; ++k) {
      Vec4 e{};
      e[k] = 1.0;
      const double a = dot(e, g.zu), b = dot(e, g.zv);
      const double g1 = (g.G * a - g.F * b) / g.W, g2 = (g.E * b - g.F * a) / g.W;
      const Vec4 w = sub(e, add(scale(g1, g.zu), scale(g2, g.zv)));
      if (norm(w) > best) {
        best = norm(w);
        n1 = w;
      }
    }
  }
  n1 = scale(1.0 / norm(n1), n1);
  Vec4 n2 = cross3(g.zu, g.zv, n1);
  n2 = scale(orientation / norm(n2), n2);
  return {n1, n2};
}

}  // namespace

FundamentalForms fundamental_forms(const Chart& chart, double u, double v, const Tolerances& tol) {
  const auto d = chart_derivs<double>(chart, u, v);
  const auto g = point_geometry(d);
  if (!(g.W > tol.eps_det))
    throw Error(ErrorKind::DegenerateMetric, "degenerate metric: EG - F^2 = " + fmt_num(g.W), Point2{u, v});
  FundamentalForms f;
  f.E = g.E;
  f.F = g.F;
  f.G = g.G;
  f.sigma_uu = g.suu;
  f.sigma_uv = g.suv;
  f.sigma_vv = g.svv;
  const Vec4* second[3] = {&d.zuu, &d.zuv, &d.zvv};
  for (int m = 0; m < 3; ++m) {
    const double a = dot(*second[m], d.zu), b = dot(*second[m], d.zv);
    f.christoffel[0][m] = (g.G * a - g.F * b) / g.W;
    f.christoffel[1][m] = (g.E * b - g.F * a) / g.W;
  }
  f.normals = normal_pair(g, chart.orientation);
  const Vec4* sig[3] = {&f.sigma_uu, &f.sigma_uv, &f.sigma_vv};
  for (int k = 0; k < 2; ++k)
    for (int m = 0; m < 3; ++m) f.c[k][m] = dot(*sig[m], f.normals[k]);
  const double sw = std::sqrt(g.W);
  const auto& c = f.c;
  f.L = 2.0 / sw * (c[0][0] * c[1][1] - c[1][0] * c[0][1]);
  f.M = 1.0 / sw * (c[0][0] * c[1][2] - c[1][0] * c[0][2]);
  f.N = 2.0 / sw * (c[0][1] * c[1][2] - c[1][1] * c[0][2]);
  return f;
}

Invariants invariants(const FundamentalForms& f) {
  Invariants r;
  const double W = f.E * f.G - f.F * f.F;
  r.k = (f.L * f.N - f.M * f.M) / W;
  r.varkappa = (f.E * f.N - 2 * f.F * f.M + f.G * f.L) / (2 * W);
  r.K = (dot(f.sigma_uu, f.sigma_vv) - dot(f.sigma_uv, f.sigma_uv)) / W;
  r.H = scale(1.0 / (2 * W), add(add(scale(f.G, f.sigma_uu), scale(-2 * f.F, f.sigma_uv)), scale(f.E, f.sigma_vv)));
  r.H_norm = norm(r.H);
  return r;
}

double principal_residual(const FundamentalForms& f) {
  const double W = f.E * f.G - f.F * f.F;
  return std::max(std::abs(f.F) / std::sqrt(f.E * f.G), std::abs(f.M) / std::sqrt(W));
}

Frame geometric_frame(const Chart& chart, double u, double v, const Tolerances& tol) {
  const auto forms = fundamental_forms(chart, u, v, tol);
  const auto inv = invariants(forms);
  if (!(inv.H_norm > tol.eps_min))
    throw Error(ErrorKind::MinimalPoint, "minimal point: |H| = " + fmt_num(inv.H_norm), Point2{u, v});
  const double res = principal_residual(forms);
  if (!(res < tol.tol_principal))
    throw Error(ErrorKind::NonPrincipal, "parametrization is not principal (residual " + fmt_num(res) + ")",
                Point2{u, v});
  const auto d = chart_derivs<double>(chart, u, v);
  const auto ft = frame_from(point_geometry(d), chart.orientation);
  return {ft.x, ft.y, ft.b, ft.l};
}

PrincipalCheck is_principal(const Chart& chart, const Lattice& lattice, const Tolerances& tol) {
  PrincipalCheck out;
  for (int j = 0; j < lattice.nv; ++j)
    for (int i = 0; i < lattice.nu; ++i) {
      const auto f = fundamental_forms(chart, lattice.u(i), lattice.v(j), tol);
      out.max_residual = std::max(out.max_residual, principal_residual(f));
    }
  out.principal = out.max_residual < tol.tol_principal;
  return out;
}

Chart scaled(const Chart& chart, double alpha) {
  Chart c = chart;
  for (auto& e : c.coords) e = Expression::number(alpha) * e;
  return c;
}

}  // namespace canon4
