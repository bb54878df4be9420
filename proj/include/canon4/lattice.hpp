#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace canon4 {

struct Domain {
  double u_min = 0.0, u_max = 0.0;
  double v_min = 0.0, v_max = 0.0;

  bool contains(double u, double v, double slack = 1e-12) const;
};

/// Rectangular (u, v) lattice. Storage order is v-major: index = j * nu + i.
struct Lattice {
  int nu = 1, nv = 1;
  Domain bounds;

  double hu() const { return nu > 1 ? (bounds.u_max - bounds.u_min) / (nu - 1) : 0.0; }
  double hv() const { return nv > 1 ? (bounds.v_max - bounds.v_min) / (nv - 1) : 0.0; }
  double u(int i) const { return nu > 1 ? bounds.u_min + i * hu() : bounds.u_min; }
  double v(int j) const { return nv > 1 ? bounds.v_min + j * hv() : bounds.v_min; }
  std::size_t size() const { return static_cast<std::size_t>(nu) * static_cast<std::size_t>(nv); }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nu + i; }

  /// Throws an input error for empty or inverted lattices.
  void validate() const;

  /// Each cell split into `factor` cells; original nodes keep indices i * factor.
  Lattice refined(int factor) const;

  /// Index of the node at coordinate x along an axis, or -1 if x is not a node.
  int node_u(double x) const;
  int node_v(double x) const;
};

/// Scalar samples on a lattice. Masked nodes hold NaN.
struct GridField {
  Lattice lattice;
  std::vector<double> values;

  GridField() = default;
  explicit GridField(const Lattice& lat, double fill = 0.0) : lattice(lat), values(lat.size(), fill) {}

  double& at(int i, int j) { return values[lattice.index(i, j)]; }
  double at(int i, int j) const { return values[lattice.index(i, j)]; }

  /// Max |value| over unmasked nodes (0 if none).
  double max_abs() const;
  /// Mean |value| over unmasked nodes (0 if none).
  double mean_abs() const;
};

/// Derivative of equally spaced samples. Fourth order (five-point) everywhere,
/// using shifted stencils at the two outermost nodes on each side; lower order
/// when fewer than five samples exist.
std::vector<double> derivative_1d(const std::vector<double>& f, double h);

GridField diff_u(const GridField& f);
GridField diff_v(const GridField& f);

/// Running integral of equally spaced samples from node `base`: out[i] = int_{x_base}^{x_i} f.
/// Fourth-order cubic panels; trapezoid when fewer than four samples exist.
std::vector<double> cumulative_integral(const std::vector<double>& f, double h, int base);

/// Composite Simpson on [a, b] with `panels` panels, Richardson-extrapolated
/// against the half-step rule.
double integrate(const std::function<double(double)>& f, double a, double b, int panels = 8);

/// Running integral from x0 to every point of `xs` (any order), piecewise between
/// neighbouring points with `integrate`.
std::vector<double> cumulative_from(const std::function<double(double)>& f, double x0, const std::vector<double>& xs,
                                    int panels = 4);

/// Cubic Hermite interpolation on an increasing knot sequence with given slopes.
double hermite(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& dy, double t);

}  // namespace canon4
