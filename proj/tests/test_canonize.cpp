#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <memory>

#include "canon4/canonize.hpp"
#include "canon4/catalog.hpp"

using namespace canon4;

namespace {

Lattice lattice(int n, Domain d) {
  Lattice l;
  l.nu = l.nv = n;
  l.bounds = d;
  return l;
}

Chart chart_of(std::array<std::string, 4> coords, Domain d) {
  SurfaceDefinition s;
  s.name = "test";
  s.coords = std::move(coords);
  s.domain = d;
  return to_chart(s);
}

std::shared_ptr<const PrincipalPatch> field_patch(std::array<std::string, 6> f, Domain d) {
  std::array<Expression, 6> e;
  for (int k = 0; k < 6; ++k) e[k] = parse(f[k]);
  return std::make_shared<FieldPatch>(e, d);
}

}  // namespace

TEST_CASE("f fields vanish for constant data") {
  const FFields f = f_fields(D1(0.7), D1(-0.2), D1(0.3), D1(1.1), Tolerances{});
  CHECK(f.f1 == 0.0);
  CHECK(f.f2 == 0.0);
  CHECK(f.f3 == 0.0);
  CHECK(f.f4 == 0.0);
  CHECK(f.denom != 0.0);
}

TEST_CASE("minimal specialization: f2 = f3 = 0 and f1 = -(ln|mu^2 - nu^2|)_v / 4") {
  const Expression nu = parse("0.3 + 0.2*sin(u*v) + 0.1*u"), mu = parse("1.5 + 0.4*cos(u - 2*v)");
  for (double u : {-0.4, 0.1, 0.7})
    for (double v : {-0.3, 0.5}) {
      const D1 n = evaluate_seeded<D1>(nu, u, v), m = evaluate_seeded<D1>(mu, u, v);
      const FFields f = f_fields(n, -n, D1(0.0), m, Tolerances{});
      CHECK(std::abs(f.f2) < 1e-10);
      CHECK(std::abs(f.f3) < 1e-10);
      const D1 w = m * m - n * n;
      CHECK(f.f1 == doctest::Approx(-0.25 * w.d[1] / w.v).epsilon(1e-12));
      CHECK(f.f4 == doctest::Approx(-0.25 * w.d[0] / w.v).epsilon(1e-12));
    }
}

TEST_CASE("degenerate f-field denominator") {
  // nu1 = nu2 = nu, lambda = kappa mu: denominator 4 mu^2 ((1 + kappa^2)^2 mu^2 - kappa^2 nu^2) vanishes
  const double mu = 0.8, kappa = 0.5, nu = (1 + kappa * kappa) * mu / kappa;
  CHECK_THROWS_AS(f_fields(D1(nu), D1(nu), D1(kappa * mu), D1(mu), Tolerances{}), Error);
  try {
    f_fields(D1(nu), D1(nu), D1(kappa * mu), D1(mu), Tolerances{}, {0.25, 0.5});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateDenominator);
    REQUIRE(e.where());
    CHECK(e.where()->u == 0.25);
  }
}

TEST_CASE("identities (ln sqrt E)_v and (ln sqrt G)_u on principal charts") {
  for (const char* name : {"example2", "example3_rotated", "rotational_fixture", "example4_rotated"}) {
    CAPTURE(name);
    const Chart c = catalog_chart(name);
    const ChartPatch p(c);
    const Lattice lat = lattice(9, c.domain);
    double worst = 0;
    for (int j = 0; j < lat.nv; ++j)
      for (int i = 0; i < lat.nu; ++i) {
        const double u = lat.u(i), v = lat.v(j);
        const auto s = p.sample(u, v);
        const auto g = geometric_functions_jet(c, u, v);
        const double lnE_v = g.E.d[1] / (2 * g.E.v), lnG_u = g.G.d[0] / (2 * g.G.v);
        worst = std::max(worst, std::abs(lnE_v - (s.f.f1 + s.f.f2 * s.sqrtG / s.sqrtE)));
        worst = std::max(worst, std::abs(lnG_u - (s.f.f3 * s.sqrtE / s.sqrtG + s.f.f4)));
      }
    CHECK(worst < 1e-8);
  }
}

TEST_CASE("example 2 f fields in closed form") {
  const ChartPatch p(catalog_chart("example2"));
  for (double u : {0.0, 0.3, 0.9}) {
    const auto s = p.sample(u, 0.4);
    CHECK(std::abs(s.f.f1) < 1e-12);
    CHECK(std::abs(s.f.f2) < 1e-12);
    CHECK(std::abs(s.f.f3) < 1e-12);
    CHECK(s.f.f4 == doctest::Approx(u / (1 + u * u)).epsilon(1e-10));
  }
}

TEST_CASE("phi and psi") {
  const Tolerances tol;
  SUBCASE("example 1 surface is canonical") {
    const ChartPatch p(catalog_chart("example1_surface"));
    const auto r = phi_psi(p, {0, 0}, {}, lattice(11, {-1, 1, -1, 1}), tol);
    CHECK(r.is_canonical);
    CHECK(r.max_deviation < 1e-8);
  }
  SUBCASE("example 2 in its own parameters: phi = 1/sqrt(1 + u^2), psi = 1") {
    const ChartPatch p(catalog_chart("example2"));
    const auto r = phi_psi(p, {0, 0}, {}, lattice(11, {0, 1, 0, 1}), tol);
    CHECK_FALSE(r.is_canonical);
    for (std::size_t i = 0; i < r.u.size(); ++i)
      CHECK(r.phi[i] == doctest::Approx(1 / std::sqrt(1 + r.u[i] * r.u[i])).epsilon(1e-9));
    for (double x : r.psi) CHECK(x == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("example2_canonical is canonical") {
    const ChartPatch p(catalog_chart("example2_canonical"));
    const auto r = phi_psi(p, {0, 0}, {}, lattice(11, {0, 1, 0, 1}), tol);
    CHECK(r.is_canonical);
  }
  SUBCASE("example 3 rotated: phi = psi = sqrt(2), not canonical") {
    const ChartPatch p(catalog_chart("example3_rotated"));
    const auto r = phi_psi(p, {0, 0}, {}, lattice(11, {-0.5, 0.5, -0.5, 0.5}), tol);
    CHECK_FALSE(r.is_canonical);
    for (double x : r.phi) CHECK(x == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
    for (double x : r.psi) CHECK(x == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
  }
  SUBCASE("example 3 with u -> sqrt(2) sinh u is not canonical; u -> u / sqrt(2) is") {
    const Chart sinh_chart = chart_of({"cosh(sqrt(2)*sinh(u) + sqrt(2)*sinh(v))*cos(sqrt(2)*sinh(u) - sqrt(2)*sinh(v))",
                                       "cosh(sqrt(2)*sinh(u) + sqrt(2)*sinh(v))*sin(sqrt(2)*sinh(u) - sqrt(2)*sinh(v))",
                                       "cos(sqrt(2)*sinh(u) + sqrt(2)*sinh(v))",
                                       "sin(sqrt(2)*sinh(u) + sqrt(2)*sinh(v))"},
                                      {-0.3, 0.3, -0.3, 0.3});
    const auto bad = phi_psi(ChartPatch(sinh_chart), {0, 0}, {}, lattice(7, sinh_chart.domain), tol);
    CHECK_FALSE(bad.is_canonical);
    const ChartPatch good(catalog_chart("example3_canonical"));
    CHECK(phi_psi(good, {0, 0}, {}, lattice(11, {-0.7, 0.7, -0.7, 0.7}), tol).is_canonical);
  }
  SUBCASE("example 4 rotated is canonical with c1 = c2 = -ln sqrt 2") {
    const ChartPatch p(catalog_chart("example4_rotated"));
    const double c = -0.5 * std::log(2.0);
    CHECK(phi_psi(p, {0, 0}, {c, c, false}, lattice(11, {-1, 1, -1, 1}), tol).is_canonical);
    CHECK_FALSE(phi_psi(p, {0, 0}, {}, lattice(11, {-1, 1, -1, 1}), tol).is_canonical);
  }
  SUBCASE("normalize at base fixes phi(u0) = psi(v0) = 1") {
    const ChartPatch p(catalog_chart("rotational_fixture"));
    const auto r = phi_psi(p, {0.2, 0}, {0, 0, true}, lattice(11, {0.2, 1.2, 0, 1}), tol);
    CHECK(r.phi[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.psi[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.c1 == doctest::Approx(-std::log(p.sample(0.2, 0).sqrtE)));
  }
}

TEST_CASE("phi is independent of v on every principal chart") {
  for (const auto& def : catalog()) {
    if (!def.principal) continue;
    CAPTURE(def.name);
    const ChartPatch p(to_chart(def));
    const auto r = phi_psi(p, def.base, {def.c1, def.c2, false}, lattice(9, def.domain));
    CHECK(r.phi_spread < 1e-8);
    CHECK(r.psi_spread < 1e-8);
    CHECK(r.is_canonical == def.canonical);
  }
}

TEST_CASE("constancy violation on incompatible fields") {
  const auto p = field_patch({"1 + 0.3*u*v", "1", "0.2", "0.1", "0.3*v", "1 + 0.2*u"}, {-1, 1, -1, 1});
  try {
    phi_psi(*p, {0, 0}, {}, lattice(7, {-1, 1, -1, 1}));
    FAIL("expected ConstancyViolation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConstancyViolation);
  }
}

TEST_CASE("phi transforms covariantly under a change of the u parameter") {
  // u = exp(s): the new phi is phi(exp(s)) exp(s)
  const Chart base = catalog_chart("rotational_fixture");
  const Chart sub = chart_of({"(2 + sin(exp(u)))*cos(v)", "(2 + sin(exp(u)))*sin(v)", "exp(u)*cos(v)",
                              "exp(u)*sin(v)"},
                             {std::log(0.3), std::log(1.1), 0, 1});
  const ChartPatch p0(base), p1(sub);
  auto at = [](const PrincipalPatch& p, Point2 base_pt, double u, double v) {
    Lattice l;
    l.bounds = {u, u, v, v};
    return phi_psi(p, base_pt, {}, l);
  };
  for (double u : {0.3, 0.45, 0.8, 1.1})
    for (double v : {0.0, 0.7}) {
      CAPTURE(u);
      const auto r0 = at(p0, {0.3, 0}, u, v), r1 = at(p1, {std::log(0.3), 0}, std::log(u), v);
      CHECK(r1.phi[0] == doctest::Approx(r0.phi[0] * u).epsilon(1e-10));
      CHECK(r1.psi[0] == doctest::Approx(r0.psi[0]).epsilon(1e-9));
    }
}

TEST_CASE("monotone map") {
  std::vector<double> x, y, s;
  for (int k = 0; k <= 40; ++k) {
    const double t = -1 + k * 0.05;
    x.push_back(t);
    y.push_back(std::sinh(t));
    s.push_back(std::cosh(t));
  }
  const MonotoneMap m(x, y, s);
  for (double t : {-0.93, -0.2, 0.0, 0.41, 0.99}) {
    CHECK(m.forward(t) == doctest::Approx(std::sinh(t)).epsilon(1e-7));
    CHECK(m.slope(t) == doctest::Approx(std::cosh(t)).epsilon(1e-5));
    CHECK(m.inverse(m.forward(t)) == doctest::Approx(t).epsilon(1e-13));
  }
  s[3] = -1;
  CHECK_THROWS_AS(MonotoneMap(x, y, s), Error);
}

TEST_CASE("canonize transform") {
  SUBCASE("identity on a canonical chart") {
    const auto p = std::make_shared<ChartPatch>(catalog_chart("example2_canonical"));
    const auto r = canonize_transform(p, {0, 0}, {});
    for (double t : {0.0, 0.13, 0.5, 0.88, 1.0}) {
      CHECK(std::abs(r.map_u.forward(t) - t) < 1e-8);
      CHECK(std::abs(r.map_v.forward(t) - t) < 1e-8);
    }
  }
  SUBCASE("example 2 goes to asinh") {
    const auto p = std::make_shared<ChartPatch>(catalog_chart("example2"));
    const auto r = canonize_transform(p, {0, 0}, {});
    for (double t : {0.1, 0.5, 1.0}) CHECK(std::abs(r.map_u.forward(t) - std::asinh(t)) < 1e-8);
    const Domain d = r.patch->domain();
    const auto rep = phi_psi(*r.patch, {0, 0}, {}, lattice(9, d));
    CHECK(rep.is_canonical);
    CHECK(rep.max_deviation < 1e-6);
    // positions agree with the canonical catalog chart
    const ChartPatch ref(catalog_chart("example2_canonical"));
    for (double u : {0.2, 0.8}) {
      const Vec4 a = r.patch->position(u, 0.3), b = ref.position(u, 0.3);
      for (int k = 0; k < 4; ++k) CHECK(std::abs(a[k] - b[k]) < 1e-8);
    }
  }
  SUBCASE("example 3 rotated: U = sqrt(2) u, and the result is canonical") {
    const auto p = std::make_shared<ChartPatch>(catalog_chart("example3_rotated"));
    const auto r = canonize_transform(p, {0, 0}, {});
    for (double t : {-0.5, -0.1, 0.3, 0.5}) {
      CHECK(std::abs(r.map_u.forward(t) - std::sqrt(2.0) * t) < 1e-8);
      CHECK(std::abs(r.map_v.forward(t) - std::sqrt(2.0) * t) < 1e-8);
    }
    CHECK_FALSE(phi_psi(*p, {0, 0}, {}, lattice(9, p->domain())).is_canonical);
    const auto rep = phi_psi(*r.patch, {0, 0}, {}, lattice(9, r.patch->domain()));
    CHECK(rep.is_canonical);
  }
  SUBCASE("idempotent") {
    const auto p = std::make_shared<ChartPatch>(catalog_chart("rotational_fixture"));
    const auto once = canonize_transform(p, {0.2, 0}, {0.1, -0.2, false});
    CHECK(phi_psi(*once.patch, {0.2, 0}, {0.1, -0.2, false}, lattice(9, once.patch->domain())).max_deviation < 1e-6);
    const auto twice = canonize_transform(once.patch, {0.2, 0}, {0.1, -0.2, false});
    const Domain d = once.patch->domain();
    for (int k = 0; k <= 8; ++k) {
      const double u = d.u_min + (d.u_max - d.u_min) * k / 8, v = d.v_min + (d.v_max - d.v_min) * k / 8;
      CHECK(std::abs(twice.map_u.forward(u) - u) < 1e-8);
      CHECK(std::abs(twice.map_v.forward(v) - v) < 1e-8);
    }
  }
  SUBCASE("base point outside the domain") {
    const auto p = std::make_shared<ChartPatch>(catalog_chart("example2"));
    CHECK_THROWS_AS(canonize_transform(p, {2, 0}, {}), Error);
  }
}

TEST_CASE("principal rotation") {
  const Tolerances tol;
  SUBCASE("example 4") {
    const Chart raw = catalog_chart("example4_raw");
    CHECK_FALSE(is_principal(raw, lattice(11, raw.domain), tol).principal);
    const Chart r = principal_rotation(raw, lattice(11, raw.domain), tol);
    CHECK(is_principal(r, lattice(11, r.domain), tol).principal);
    const Chart ref = catalog_chart("example4_rotated");
    for (double u : {-0.3, 0.2})
      for (double v : {-0.1, 0.4})
        for (int k = 0; k < 4; ++k)
          CHECK(evaluate(r.coords[k], u, v) == doctest::Approx(evaluate(ref.coords[k], u, v)).epsilon(1e-14));
    CHECK(r.domain.u_min == doctest::Approx(-0.5));
    CHECK(r.domain.u_max == doctest::Approx(0.5));
  }
  SUBCASE("example 3") {
    const Chart raw = catalog_chart("example3_raw");
    const Chart r = principal_rotation(raw, lattice(11, raw.domain), tol);
    CHECK(is_principal(r, lattice(11, r.domain), tol).principal);
    const auto g = geometric_functions(r, 0.2, -0.1);
    CHECK(g.mu == doctest::Approx(-1 / std::pow(std::cosh(0.1), 2)).epsilon(1e-10));
  }
  SUBCASE("pattern guards") {
    for (const char* name : {"example2", "example4_rotated", "rotational_fixture"}) {
      CAPTURE(name);
      const Chart c = catalog_chart(name);
      try {
        principal_rotation(c, lattice(7, c.domain), tol);
        FAIL("expected PatternNotApplicable");
      } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::PatternNotApplicable);
      }
    }
  }
}

TEST_CASE("PNMCVF specialization") {
  const Lattice lat = lattice(9, {-0.5, 0.5, -0.5, 0.5});
  SUBCASE("constant nu, lambda = kappa mu") {
    const std::string mu = "(1 + 0.3*u + 0.2*v^2)";
    const auto p = field_patch({"1/sqrt(" + mu + ")", "1/sqrt(" + mu + ")", "0.5", "0.5", "0.5*" + mu, mu},
                               lat.bounds);
    const auto r = pnmcv_check(*p, {0, 0}, lat);
    CHECK(r.max_beta < 1e-12);
    CHECK(r.identity_v < 1e-10);
    CHECK(r.identity_u < 1e-10);
    CHECK(r.variant_identity_v > 1e-2);
    CHECK(r.phi_gap < 1e-8);
    CHECK(r.psi_gap < 1e-8);
  }
  SUBCASE("constant mu, nu = g(u + v) + h(u - v), lambda = g - h") {
    const std::string g = "0.3*sin(u + v)", h = "0.2*cos(u - v)";
    const auto p = field_patch({"1/sqrt(1.3)", "1/sqrt(1.3)", g + " + " + h, g + " + " + h, g + " - " + h, "1.3"},
                               lat.bounds);
    const auto r = pnmcv_check(*p, {0.1, -0.2}, lat);
    CHECK(r.max_beta < 1e-12);
    CHECK(r.identity_v < 1e-10);
    CHECK(r.identity_u < 1e-10);
    CHECK(r.phi_gap < 1e-8);
    CHECK(r.phi_gap_variant > 1e-2);
  }
  SUBCASE("example 1 and example 2") {
    const ChartPatch ex1(catalog_chart("example1_surface"));
    const auto r = pnmcv_check(ex1, {0, 0}, lattice(7, {-1, 1, -1, 1}));
    CHECK(r.identity_v < 1e-8);
    CHECK(r.phi_gap < 1e-8);
    const ChartPatch ex2(catalog_chart("example2"));
    try {
      pnmcv_check(ex2, {0, 0}, lattice(7, {0, 1, 0, 1}));
      FAIL("expected NotPnmcvf");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NotPnmcvf);
    }
  }
}
