#include "canon4/catalog.hpp"

#include <cmath>

namespace canon4 {

Chart to_chart(const SurfaceDefinition& def) {
  Lattice check;
  check.bounds = def.domain;
  check.validate();
  if (def.orientation != 1 && def.orientation != -1) throw Error(ErrorKind::Input, "orientation must be +1 or -1");
  Chart c;
  c.name = def.name;
  c.domain = def.domain;
  c.orientation = def.orientation;
  for (int k = 0; k < 4; ++k) c.coords[k] = parse(def.coords[k]);
  return c;
}

namespace {

const double kLnSqrt2 = 0.5 * std::log(2.0);

std::vector<SurfaceDefinition> build_catalog() {
  std::vector<SurfaceDefinition> out;
  auto add = [&](std::string name, std::string description, std::array<std::string, 4> coords, Domain d,
                 bool principal, bool canonical, double c1 = 0.0, double c2 = 0.0, Point2 base = {0.0, 0.0}) {
    SurfaceDefinition s;
    s.name = std::move(name);
    s.description = std::move(description);
    s.coords = std::move(coords);
    s.domain = d;
    s.principal = principal;
    s.canonical = canonical;
    s.c1 = c1;
    s.c2 = c2;
    s.c = std::exp(c2 - c1);
    s.base = base;
    out.push_back(std::move(s));
  };
  add("plane", "coordinate plane; totally geodesic, minimal everywhere", {"u", "v", "0", "0"}, {-1, 1, -1, 1}, false,
      false);
  add("example1_surface", "flat Chen surface with nu1 = nu2 = mu = 1, lambda = 0 in canonical parameters",
      {"sin(u)*cos(v)", "cos(u)*sin(v)", "1 - cos(u)*cos(v)", "sin(u)*sin(v)"}, {-1, 1, -1, 1}, true, true);
  add("example2", "ruled surface (u cos v, u sin v, cos v, sin v); principal, not canonical",
      {"u*cos(v)", "u*sin(v)", "cos(v)", "sin(v)"}, {0, 1, 0, 1}, true, false);
  add("example2_canonical", "the same surface in canonical parameters (u -> sinh u)",
      {"sinh(u)*cos(v)", "sinh(u)*sin(v)", "cos(v)", "sin(v)"}, {0, 1, 0, 1}, true, true);
  add("example3_raw", "(cosh u cos v, cosh u sin v, cos u, sin u); E = G, F = 0, not principal",
      {"cosh(u)*cos(v)", "cosh(u)*sin(v)", "cos(u)", "sin(u)"}, {-1, 1, -1, 1}, false, false);
  add("example3_rotated", "example3_raw after u -> u + v, v -> u - v; principal",
      {"cosh(u + v)*cos(u - v)", "cosh(u + v)*sin(u - v)", "cos(u + v)", "sin(u + v)"}, {-0.5, 0.5, -0.5, 0.5},
      true, false);
  add("example3_canonical", "example3_rotated in canonical parameters (u -> u/sqrt(2), v -> v/sqrt(2))",
      {"cosh((u + v)/sqrt(2))*cos((u - v)/sqrt(2))", "cosh((u + v)/sqrt(2))*sin((u - v)/sqrt(2))",
       "cos((u + v)/sqrt(2))", "sin((u + v)/sqrt(2))"},
      {-0.7, 0.7, -0.7, 0.7}, true, true);
  add("example4_raw", "torus (cos u, sin u, sin v, cos v); not principal", {"cos(u)", "sin(u)", "sin(v)", "cos(v)"},
      {-1, 1, -1, 1}, false, false);
  add("example4_rotated", "example4_raw after u -> u + v, v -> u - v; canonical for c1 = c2 = -ln sqrt(2)",
      {"cos(u + v)", "sin(u + v)", "sin(u - v)", "cos(u - v)"}, {-1, 1, -1, 1}, true, true, -kLnSqrt2, -kLnSqrt2);
  add("torus_homothetic", "example4_rotated divided by sqrt(2); same invariants as example1_surface",
      {"cos(u + v)/sqrt(2)", "sin(u + v)/sqrt(2)", "sin(u - v)/sqrt(2)", "cos(u - v)/sqrt(2)"}, {-1, 1, -1, 1}, true,
      true);
  add("rotational_fixture", "((2 + sin u) cos v, (2 + sin u) sin v, u cos v, u sin v); principal, generic",
      {"(2 + sin(u))*cos(v)", "(2 + sin(u))*sin(v)", "u*cos(v)", "u*sin(v)"}, {0.2, 1.2, 0, 1}, true, false,
      0.0, 0.0, {0.2, 0.0});
  return out;
}

std::vector<DataDefinition> build_data_catalog() {
  std::vector<DataDefinition> out;
  auto lattice = [](int n, Domain d) {
    Lattice l;
    l.nu = l.nv = n;
    l.bounds = d;
    return l;
  };
  {
    DataDefinition d;
    d.name = "example1";
    d.description = "nu1 = nu2 = mu = 1, lambda = 0";
    d.functions = {"1", "1", "0", "1"};
    d.lattice = lattice(41, {-1, 1, -1, 1});
    out.push_back(d);
  }
  {
    DataDefinition d;
    d.name = "example1_homothetic";
    d.description = "example1 functions divided by sqrt(2), constants matching example4_rotated";
    d.functions = {"1/sqrt(2)", "1/sqrt(2)", "0", "1/sqrt(2)"};
    d.lattice = lattice(41, {-1, 1, -1, 1});
    d.c1 = d.c2 = -kLnSqrt2;
    out.push_back(d);
  }
  {
    DataDefinition d;
    d.name = "minimal_point";
    d.description = "mu vanishes on the line u = 0";
    d.functions = {"1", "1", "0", "u"};
    d.lattice = lattice(11, {-1, 1, -1, 1});
    out.push_back(d);
  }
  return out;
}

}  // namespace

const std::vector<SurfaceDefinition>& catalog() {
  static const std::vector<SurfaceDefinition> c = build_catalog();
  return c;
}

std::optional<SurfaceDefinition> find_surface(const std::string& name) {
  for (const auto& s : catalog())
    if (s.name == name) return s;
  return std::nullopt;
}

Chart catalog_chart(const std::string& name) {
  auto s = find_surface(name);
  if (!s) throw Error(ErrorKind::Input, "unknown catalog surface '" + name + "'");
  return to_chart(*s);
}

const std::vector<DataDefinition>& data_catalog() {
  static const std::vector<DataDefinition> c = build_data_catalog();
  return c;
}

std::optional<DataDefinition> find_data(const std::string& name) {
  for (const auto& d : data_catalog())
    if (d.name == name) return d;
  return std::nullopt;
}

}  // namespace canon4
