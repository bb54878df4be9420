#pragma once

#include <optional>
#include <string>
#include <vector>

#include "canon4/surface.hpp"

namespace canon4 {

/// A surface as stored in files and in the built-in catalog.
struct SurfaceDefinition {
  std::string name;
  std::string description;
  std::array<std::string, 4> coords;
  Domain domain;
  int orientation = 1;
  Point2 base{0.0, 0.0};
  double c1 = 0.0, c2 = 0.0, c = 1.0;
  /// True if the chart is principal and non-minimal on its domain.
  bool principal = true;
  /// True if the parameters are canonical for (base, c1, c2).
  bool canonical = false;
};

/// Parses the coordinate expressions. Throws on syntax errors or an empty domain.
Chart to_chart(const SurfaceDefinition& def);

const std::vector<SurfaceDefinition>& catalog();
std::optional<SurfaceDefinition> find_surface(const std::string& name);
/// Chart of a catalog entry; throws an input error for unknown names.
Chart catalog_chart(const std::string& name);

/// Determining data (nu1, nu2, lambda, mu) in closed form, as stored in files and the catalog.
struct DataDefinition {
  std::string name;
  std::string description;
  std::array<std::string, 4> functions;  // nu1, nu2, lambda, mu
  Lattice lattice;
  Point2 base{0.0, 0.0};
  double c1 = 0.0, c2 = 0.0;
  std::optional<double> c;
};

const std::vector<DataDefinition>& data_catalog();
std::optional<DataDefinition> find_data(const std::string& name);

}  // namespace canon4
