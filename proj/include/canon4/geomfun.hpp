#pragma once

#include <string>
#include <vector>

#include "canon4/surface.hpp"

namespace canon4 {

/// The eight geometric functions together with E and G.
template <class T>
struct GeoRecord {
  T nu1{}, nu2{}, lambda{}, mu{}, gamma1{}, gamma2{}, beta1{}, beta2{}, E{}, G{};
};

using GeometricFunctions = GeoRecord<double>;

template <class S>
using inner_t = decltype(S{}.v);

/// nu1, nu2, lambda, mu and the frame, all at scalar type S.
template <class S>
struct GeoLevel {
  S nu1, nu2, lambda, mu;
  FrameT<S> frame;
};

template <class S>
GeoLevel<S> geo_level(const Chart& chart, double u, double v) {
  using std::sqrt;
  const auto g = point_geometry(chart_derivs<S>(chart, u, v));
  GeoLevel<S> r;
  r.frame = frame_from(g, chart.orientation);
  const S sEG = r.frame.sqrtE * r.frame.sqrtG;
  r.nu1 = dot(g.suu, r.frame.b) / g.E;
  r.nu2 = dot(g.svv, r.frame.b) / g.G;
  r.lambda = dot(g.suv, r.frame.b) / sEG;
  r.mu = dot(g.suv, r.frame.l) / sEG;
  return r;
}

/// Drops one derivative level: gamma and beta come from the derivatives of
/// sqrt(E), sqrt(G) and b carried by S.
template <class S>
GeoRecord<inner_t<S>> lower(const GeoLevel<S>& g) {
  using I = inner_t<S>;
  GeoRecord<I> r;
  r.nu1 = g.nu1.v;
  r.nu2 = g.nu2.v;
  r.lambda = g.lambda.v;
  r.mu = g.mu.v;
  const I sE = g.frame.sqrtE.v, sG = g.frame.sqrtG.v;
  r.E = sE * sE;
  r.G = sG * sG;
  const I sEG = sE * sG;
  r.gamma1 = -g.frame.sqrtE.d[1] / sEG;
  r.gamma2 = -g.frame.sqrtG.d[0] / sEG;
  V4<I> bu, bv, l;
  for (int k = 0; k < 4; ++k) {
    bu[k] = g.frame.b[k].d[0];
    bv[k] = g.frame.b[k].d[1];
    l[k] = g.frame.l[k].v;
  }
  r.beta1 = dot(bu, l) / sE;
  r.beta2 = dot(bv, l) / sG;
  return r;
}

/// Checks the metric, minimality and principality at a point; throws the matching error.
void require_principal_point(const Chart& chart, double u, double v, const Tolerances& tol);

GeometricFunctions geometric_functions(const Chart& chart, double u, double v, const Tolerances& tol = {});

/// Values and first partials of the eight functions and of E, G.
GeoRecord<D1> geometric_functions_jet(const Chart& chart, double u, double v, const Tolerances& tol = {});

struct InvariantTriple {
  double k = 0, varkappa = 0, K = 0;
};

/// k = -4 nu1 nu2 mu^2, varkappa = (nu1 - nu2) mu, K = nu1 nu2 - (lambda^2 + mu^2).
InvariantTriple invariant_identities(const GeometricFunctions& gf);

/// r[i] = LHS - RHS of the six compatibility equations.
struct SystemResidual {
  std::array<double, 6> r{};
  double max_abs() const;
};

SystemResidual basic_system_residual(const GeoRecord<D1>& gf);

/// beta1, beta2 solved from the two mu*beta relations (cross-check of the frame route).
std::array<double, 2> beta_from_mu_relations(const GeoRecord<D1>& gf);

/// mu_u / (2 mu gamma2 + nu1 beta2 - lambda beta1) and the v-analogue; NaN on a vanishing denominator.
std::array<double, 2> auxiliary_quotients(const GeoRecord<D1>& gf);

/// Multiplies one field (value and partials) by a factor.
struct Perturbation {
  std::string field;
  double factor = 1.0;
};
void apply_perturbation(GeoRecord<D1>& gf, const Perturbation& p);

/// Geometric functions sampled on a lattice; minimal points are masked with NaN.
struct GeoGrid {
  Lattice lattice;
  GridField nu1, nu2, lambda, mu, gamma1, gamma2, beta1, beta2, E, G;
  std::size_t masked = 0;
};

GeoGrid geometric_grid(const Chart& chart, const Lattice& lattice, const Tolerances& tol = {});

struct ResidualGrid {
  Lattice lattice;
  std::array<GridField, 6> r;
  std::size_t masked = 0;
  double max_abs() const;
};

/// Residuals on a lattice from chart jets. Minimal points are masked.
ResidualGrid basic_system_residual(const Chart& chart, const Lattice& lattice, const Tolerances& tol = {},
                                   const std::vector<Perturbation>& perturb = {});

/// Residuals from sampled functions, derivatives by finite-difference stencils.
ResidualGrid basic_system_residual(const GeoGrid& grid);

}  // namespace canon4
