#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "canon4/catalog.hpp"
#include "canon4/geomfun.hpp"

using namespace canon4;

namespace {
Lattice lattice(int n, Domain d) {
  Lattice l;
  l.nu = l.nv = n;
  l.bounds = d;
  return l;
}
}  // namespace

TEST_CASE("example 2 geometric functions") {
  const Chart c = catalog_chart("example2");
  for (double u : {0.0, 0.25, 0.5, 1.0})
    for (double v : {0.0, 0.6}) {
      const auto g = geometric_functions(c, u, v);
      const double q = 1 / (1 + u * u);
      CHECK(std::abs(g.nu1) < 1e-12);
      CHECK(g.nu2 == doctest::Approx(q).epsilon(1e-12));
      CHECK(std::abs(g.lambda) < 1e-12);
      CHECK(g.mu == doctest::Approx(q).epsilon(1e-12));
      CHECK(std::abs(g.gamma1) < 1e-12);
      CHECK(std::abs(g.gamma2 + u * q) < 1e-12);
      CHECK(std::abs(g.beta1) < 1e-12);
      CHECK(std::abs(g.beta2 - u * q) < 1e-12);
    }
}

TEST_CASE("example 3 rotated geometric functions") {
  const Chart c = catalog_chart("example3_rotated");
  for (double u : {-0.3, 0.1})
    for (double v : {-0.2, 0.4}) {
      const double s = u + v, ch2 = std::cosh(s) * std::cosh(s);
      const auto g = geometric_functions(c, u, v);
      CHECK(g.nu1 == doctest::Approx(1 / (2 * ch2)).epsilon(1e-12));
      CHECK(g.nu2 == doctest::Approx(1 / (2 * ch2)).epsilon(1e-12));
      CHECK(g.lambda == doctest::Approx(1 / (2 * ch2)).epsilon(1e-12));
      // -1/(2 cosh^2) would contradict k = -1/cosh^8 and K = -1/cosh^4; -1/cosh^2 is the true value
      CHECK(g.mu == doctest::Approx(-1 / ch2).epsilon(1e-12));
      const double gb = -std::tanh(s) / std::sqrt(1 + std::cosh(2 * s));
      for (double x : {g.gamma1, g.gamma2, g.beta1, g.beta2}) CHECK(std::abs(x - gb) < 1e-12);
      CHECK(g.E == doctest::Approx(2 * ch2));
      const auto t = invariant_identities(g);
      CHECK(t.k == doctest::Approx(-1 / std::pow(std::cosh(s), 8)));
      CHECK(t.K == doctest::Approx(-1 / (ch2 * ch2)));
      CHECK(std::abs(t.varkappa) < 1e-12);
    }
}

TEST_CASE("example 1 surface has the constant functions") {
  const Chart c = catalog_chart("example1_surface");
  const auto g = geometric_functions(c, 0.3, -0.4);
  CHECK(g.nu1 == doctest::Approx(1));
  CHECK(g.nu2 == doctest::Approx(1));
  CHECK(std::abs(g.lambda) < 1e-12);
  CHECK(g.mu == doctest::Approx(1));
  for (double x : {g.gamma1, g.gamma2, g.beta1, g.beta2}) CHECK(std::abs(x) < 1e-12);
  const auto t = invariant_identities(g);
  CHECK(t.k == doctest::Approx(-4));
  CHECK(std::abs(t.varkappa) < 1e-12);
  CHECK(std::abs(t.K) < 1e-12);
}

TEST_CASE("invariant identities") {
  GeometricFunctions g;
  g.nu1 = 0;
  g.nu2 = 0.8;
  g.mu = 0.8;
  CHECK(invariant_identities(g).varkappa == doctest::Approx(-0.64));
  g.nu1 = g.nu2 = 0.37;
  g.mu = -2.1;
  CHECK(invariant_identities(g).varkappa == 0);
}

TEST_CASE("constant functions give zero residuals") {
  GeoRecord<D1> g;
  g.nu1 = g.nu2 = g.mu = D1(1.0);
  g.E = g.G = D1(1.0);
  CHECK(basic_system_residual(g).max_abs() == 0);
}

TEST_CASE("example 2 residuals and the perturbation detector") {
  const Chart c = catalog_chart("example2");
  const Lattice lat = lattice(21, {0, 1, 0, 1});
  CHECK(basic_system_residual(c, lat).max_abs() < 1e-8);
  const auto p = basic_system_residual(c, lat, {}, {{"mu", 1.01}});
  CHECK(p.max_abs() > 1e-3);
  // r1 is homogeneous in mu for this surface (nu1 = lambda = 0), so the detector fires in r5 and r6
  CHECK(p.r[0].max_abs() < 1e-8);
  CHECK(p.r[4].max_abs() > 1e-3);
}

TEST_CASE("residuals vanish on every principal catalog chart") {
  for (const auto& def : catalog()) {
    if (!def.principal) continue;
    const auto r = basic_system_residual(to_chart(def), lattice(11, def.domain));
    CHECK_MESSAGE(r.max_abs() < 1e-8, def.name);
  }
}

TEST_CASE("stencil residuals on sampled functions") {
  const Chart c = catalog_chart("example2");
  const auto g = geometric_grid(c, lattice(41, {0, 1, 0, 1}));
  CHECK(basic_system_residual(g).max_abs() < 1e-5);
}

TEST_CASE("cross-consistency with the surface invariants and the gamma identity") {
  for (const auto& def : catalog()) {
    if (!def.principal) continue;
    const Chart c = to_chart(def);
    const Lattice lat = lattice(6, def.domain);
    for (int j = 0; j < lat.nv; ++j)
      for (int i = 0; i < lat.nu; ++i) {
        const double u = lat.u(i), v = lat.v(j);
        const auto g = geometric_functions_jet(c, u, v);
        GeometricFunctions gv{g.nu1.v, g.nu2.v, g.lambda.v, g.mu.v, g.gamma1.v,
                              g.gamma2.v, g.beta1.v, g.beta2.v, g.E.v, g.G.v};
        const auto t = invariant_identities(gv);
        const auto forms = fundamental_forms(c, u, v);
        const auto inv = invariants(forms);
        CHECK(std::abs(t.k - inv.k) < 1e-8);
        CHECK(std::abs(t.varkappa - inv.varkappa) < 1e-8);
        CHECK(std::abs(t.K - inv.K) < 1e-8);
        CHECK(std::abs(inv.H_norm - std::sqrt(inv.varkappa * inv.varkappa - inv.k) / (2 * std::abs(gv.mu))) < 1e-8);
        const double sE = std::sqrt(g.E.v), sG = std::sqrt(g.G.v);
        CHECK(std::abs(gv.gamma1 + g.E.d[1] / (2 * sE) / (sE * sG)) < 1e-8);
        CHECK(std::abs(gv.gamma2 + g.G.d[0] / (2 * sG) / (sE * sG)) < 1e-8);
        const auto b = beta_from_mu_relations(g);
        CHECK(std::abs(b[0] - gv.beta1) < 1e-8);
        CHECK(std::abs(b[1] - gv.beta2) < 1e-8);
      }
  }
}

TEST_CASE("homothety divides the functions by alpha") {
  const Chart c = catalog_chart("rotational_fixture");
  const double alpha = 1.7;
  const Chart s = scaled(c, alpha);
  const auto a = geometric_functions(c, 0.6, 0.3), b = geometric_functions(s, 0.6, 0.3);
  for (auto [x, y] : {std::pair{a.nu1, b.nu1}, {a.nu2, b.nu2}, {a.lambda, b.lambda}, {a.mu, b.mu},
                      {a.gamma1, b.gamma1}, {a.gamma2, b.gamma2}, {a.beta1, b.beta1}, {a.beta2, b.beta2}})
    CHECK(std::abs(x / alpha - y) < 1e-8);
}

TEST_CASE("orientation flip changes the sign of mu and the betas only") {
  Chart c = catalog_chart("rotational_fixture");
  const auto a = geometric_functions(c, 0.6, 0.3);
  c.orientation = -1;
  const auto b = geometric_functions(c, 0.6, 0.3);
  CHECK(std::abs(a.nu1 - b.nu1) < 1e-12);
  CHECK(std::abs(a.nu2 - b.nu2) < 1e-12);
  CHECK(std::abs(a.lambda - b.lambda) < 1e-12);
  CHECK(std::abs(a.gamma1 - b.gamma1) < 1e-12);
  CHECK(std::abs(a.gamma2 - b.gamma2) < 1e-12);
  CHECK(std::abs(a.mu + b.mu) < 1e-12);
  CHECK(std::abs(a.beta1 + b.beta1) < 1e-12);
  CHECK(std::abs(a.beta2 + b.beta2) < 1e-12);
}

TEST_CASE("auxiliary quotients equal sqrt(E) and sqrt(G) on a genuine surface") {
  const Chart c = catalog_chart("rotational_fixture");
  const auto g = geometric_functions_jet(c, 0.7, 0.2);
  const auto q = auxiliary_quotients(g);
  CHECK(q[0] == doctest::Approx(std::sqrt(g.E.v)));
  // mu does not depend on v for this surface: 0/0 is reported as NaN
  CHECK(std::isnan(q[1]));
}

TEST_CASE("errors: minimal point, non-principal") {
  try {
    geometric_functions(catalog_chart("plane"), 0, 0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MinimalPoint);
  }
  try {
    geometric_functions(catalog_chart("example4_raw"), 0.1, 0.2);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonPrincipal);
  }
  const auto g = geometric_grid(catalog_chart("plane"), lattice(3, {-1, 1, -1, 1}));
  CHECK(g.masked == 9);
}
