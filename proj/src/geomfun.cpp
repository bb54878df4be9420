#include "canon4/geomfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace canon4 {

void require_principal_point(const Chart& chart, double u, double v, const Tolerances& tol) {
  const auto forms = fundamental_forms(chart, u, v, tol);
  const auto inv = invariants(forms);
  if (!(inv.H_norm > tol.eps_min))
    throw Error(ErrorKind::MinimalPoint, "minimal point: |H| = " + fmt_num(inv.H_norm), Point2{u, v});
  const double res = principal_residual(forms);
  if (!(res < tol.tol_principal))
    throw Error(ErrorKind::NonPrincipal, "parametrization is not principal (residual " + fmt_num(res) + ")",
                Point2{u, v});
}

GeometricFunctions geometric_functions(const Chart& chart, double u, double v, const Tolerances& tol) {
  require_principal_point(chart, u, v, tol);
  return lower(geo_level<D1>(chart, u, v));
}

GeoRecord<D1> geometric_functions_jet(const Chart& chart, double u, double v, const Tolerances& tol) {
  require_principal_point(chart, u, v, tol);
  return lower(geo_level<D2>(chart, u, v));
}

InvariantTriple invariant_identities(const GeometricFunctions& g) {
  return {-4 * g.nu1 * g.nu2 * g.mu * g.mu, (g.nu1 - g.nu2) * g.mu, g.nu1 * g.nu2 - (g.lambda * g.lambda + g.mu * g.mu)};
}

double SystemResidual::max_abs() const {
  double m = 0;
  for (double x : r) m = std::max(m, std::abs(x));
  return m;
}

SystemResidual basic_system_residual(const GeoRecord<D1>& g) {
  const double sE = std::sqrt(g.E.v), sG = std::sqrt(g.G.v);
  const double n1 = g.nu1.v, n2 = g.nu2.v, la = g.lambda.v, mu = g.mu.v;
  const double g1 = g.gamma1.v, g2 = g.gamma2.v, b1 = g.beta1.v, b2 = g.beta2.v;
  SystemResidual s;
  s.r[0] = 2 * mu * g2 + n1 * b2 - la * b1 - g.mu.d[0] / sE;
  s.r[1] = 2 * mu * g1 - la * b2 + n2 * b1 - g.mu.d[1] / sG;
  s.r[2] = 2 * la * g2 + mu * b1 - (n1 - n2) * g1 - (g.lambda.d[0] / sE - g.nu1.d[1] / sG);
  s.r[3] = 2 * la * g1 + mu * b2 + (n1 - n2) * g2 - (-g.nu2.d[0] / sE + g.lambda.d[1] / sG);
  s.r[4] = n1 * n2 - (la * la + mu * mu) - (g.gamma2.d[0] / sE + g.gamma1.d[1] / sG - (g1 * g1 + g2 * g2));
  s.r[5] = g1 * b1 - g2 * b2 + (n1 - n2) * mu - (-g.beta2.d[0] / sE + g.beta1.d[1] / sG);
  return s;
}

std::array<double, 2> beta_from_mu_relations(const GeoRecord<D1>& g) {
  const double sE = std::sqrt(g.E.v), sG = std::sqrt(g.G.v), sEG = sE * sG;
  // (sqrt E)_v and (sqrt G)_u from the derivatives of E and G
  const double sE_v = g.E.d[1] / (2 * sE), sG_u = g.G.d[0] / (2 * sG);
  const double d = g.nu1.v - g.nu2.v, la = g.lambda.v;
  const double mb1 = 2 * la * sG_u / sEG - d * sE_v / sEG + g.lambda.d[0] / sE - g.nu1.d[1] / sG;
  const double mb2 = 2 * la * sE_v / sEG + d * sG_u / sEG - g.nu2.d[0] / sE + g.lambda.d[1] / sG;
  return {mb1 / g.mu.v, mb2 / g.mu.v};
}

std::array<double, 2> auxiliary_quotients(const GeoRecord<D1>& g) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double du = 2 * g.mu.v * g.gamma2.v + g.nu1.v * g.beta2.v - g.lambda.v * g.beta1.v;
  const double dv = 2 * g.mu.v * g.gamma1.v - g.lambda.v * g.beta2.v + g.nu2.v * g.beta1.v;
  const double eps = 1e-14;
  return {std::abs(du) > eps ? g.mu.d[0] / du : nan, std::abs(dv) > eps ? g.mu.d[1] / dv : nan};
}

void apply_perturbation(GeoRecord<D1>& g, const Perturbation& p) {
  D1* target = nullptr;
  if (p.field == "nu1") target = &g.nu1;
  else if (p.field == "nu2") target = &g.nu2;
  else if (p.field == "lambda") target = &g.lambda;
  else if (p.field == "mu") target = &g.mu;
  else if (p.field == "gamma1") target = &g.gamma1;
  else if (p.field == "gamma2") target = &g.gamma2;
  else if (p.field == "beta1") target = &g.beta1;
  else if (p.field == "beta2") target = &g.beta2;
  if (!target) throw Error(ErrorKind::Input, "unknown perturbation field '" + p.field + "'");
  *target = *target * p.factor;
}

namespace {

GridField nan_field(const Lattice& lat) { return GridField(lat, std::numeric_limits<double>::quiet_NaN()); }

}  // namespace

GeoGrid geometric_grid(const Chart& chart, const Lattice& lattice, const Tolerances& tol) {
  lattice.validate();
  GeoGrid g;
  g.lattice = lattice;
  for (GridField* f : {&g.nu1, &g.nu2, &g.lambda, &g.mu, &g.gamma1, &g.gamma2, &g.beta1, &g.beta2, &g.E, &g.G})
    *f = nan_field(lattice);
  for (int j = 0; j < lattice.nv; ++j)
    for (int i = 0; i < lattice.nu; ++i) {
      GeometricFunctions r;
      try {
        r = geometric_functions(chart, lattice.u(i), lattice.v(j), tol);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::MinimalPoint) throw;
        ++g.masked;
        continue;
      }
      g.nu1.at(i, j) = r.nu1;
      g.nu2.at(i, j) = r.nu2;
      g.lambda.at(i, j) = r.lambda;
      g.mu.at(i, j) = r.mu;
      g.gamma1.at(i, j) = r.gamma1;
      g.gamma2.at(i, j) = r.gamma2;
      g.beta1.at(i, j) = r.beta1;
      g.beta2.at(i, j) = r.beta2;
      g.E.at(i, j) = r.E;
      g.G.at(i, j) = r.G;
    }
  return g;
}

double ResidualGrid::max_abs() const {
  double m = 0;
  for (const auto& f : r) m = std::max(m, f.max_abs());
  return m;
}

ResidualGrid basic_system_residual(const Chart& chart, const Lattice& lattice, const Tolerances& tol,
                                   const std::vector<Perturbation>& perturb) {
  lattice.validate();
  ResidualGrid out;
  out.lattice = lattice;
  for (auto& f : out.r) f = nan_field(lattice);
  for (int j = 0; j < lattice.nv; ++j)
    for (int i = 0; i < lattice.nu; ++i) {
      GeoRecord<D1> g;
      try {
        g = geometric_functions_jet(chart, lattice.u(i), lattice.v(j), tol);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::MinimalPoint) throw;
        ++out.masked;
        continue;
      }
      for (const auto& p : perturb) apply_perturbation(g, p);
      const auto s = basic_system_residual(g);
      for (int k = 0; k < 6; ++k) out.r[k].at(i, j) = s.r[k];
    }
  return out;
}

ResidualGrid basic_system_residual(const GeoGrid& grid) {
  const Lattice& lat = grid.lattice;
  ResidualGrid out;
  out.lattice = lat;
  out.masked = grid.masked;
  for (auto& f : out.r) f = nan_field(lat);
  const GridField* fields[10] = {&grid.nu1,    &grid.nu2,   &grid.lambda, &grid.mu, &grid.gamma1,
                                 &grid.gamma2, &grid.beta1, &grid.beta2,  &grid.E,  &grid.G};
  std::array<GridField, 10> du, dv;
  for (int k = 0; k < 10; ++k) {
    du[k] = diff_u(*fields[k]);
    dv[k] = diff_v(*fields[k]);
  }
  for (int j = 0; j < lat.nv; ++j)
    for (int i = 0; i < lat.nu; ++i) {
      D1 d[10];
      bool ok = true;
      for (int k = 0; k < 10; ++k) {
        d[k] = D1(fields[k]->at(i, j), du[k].at(i, j), dv[k].at(i, j));
        ok = ok && all_finite(d[k]);
      }
      if (!ok) continue;
      GeoRecord<D1> g{d[0], d[1], d[2], d[3], d[4], d[5], d[6], d[7], d[8], d[9]};
      const auto s = basic_system_residual(g);
      for (int k = 0; k < 6; ++k) out.r[k].at(i, j) = s.r[k];
    }
  return out;
}

}  // namespace canon4
