#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "canon4/canonize.hpp"

namespace canon4 {

/// Values and first partials of the determining functions at one point.
struct DataJet {
  D1 nu1, nu2, lambda, mu;
};

/// Where the determining functions come from.
class DataSource {
 public:
  virtual ~DataSource() = default;
  virtual DataJet at(double u, double v) const = 0;
  /// Region where the source can be sampled; nullopt when unbounded.
  virtual std::optional<Domain> domain() const { return std::nullopt; }
};

/// Closed-form functions; partials come from jets.
class ExpressionSource : public DataSource {
 public:
  explicit ExpressionSource(std::array<Expression, 4> f) : f_(std::move(f)) {}
  DataJet at(double u, double v) const override;

 private:
  std::array<Expression, 4> f_;
};

/// Functions read off a principal chart.
class ChartSource : public DataSource {
 public:
  explicit ChartSource(Chart chart, Tolerances tol = {}) : chart_(std::move(chart)), tol_(tol) {}
  DataJet at(double u, double v) const override;
  std::optional<Domain> domain() const override { return chart_.domain; }

 private:
  Chart chart_;
  Tolerances tol_;
};

/// Sampled functions. Partials by the finite-difference stencils; off-node values
/// by tensor cubic Lagrange interpolation of values and partials.
class GridSource : public DataSource {
 public:
  explicit GridSource(std::array<GridField, 4> fields);
  DataJet at(double u, double v) const override;
  std::optional<Domain> domain() const override { return fields_[0].lattice.bounds; }
  const Lattice& lattice() const { return fields_[0].lattice; }

 private:
  double interp(const GridField& f, double u, double v) const;
  std::array<GridField, 4> fields_, du_, dv_;
};

struct DeterminingData {
  std::shared_ptr<const DataSource> source;
  Lattice lattice;  // output lattice
  Point2 base;      // must be a node of `lattice`
  double c1 = 0.0, c2 = 0.0;
  std::optional<double> c;  // defaults to exp(c2 - c1)

  double ratio() const;
};

using FProvider = std::function<FFields(double u, double v)>;
/// Values of a function of one variable on a list of nodes.
using LineFunction = std::function<std::vector<double>(const std::vector<double>& nodes)>;

FProvider f_provider(const DeterminingData& data, const Tolerances& tol = {});

struct InitialFunctions {
  LineFunction g1, g2;
};

/// g1(u) = exp(int_{u0}^u (c f3 + f4)(t, v0) dt - c1), g2(v) = exp(int_{v0}^v (f1 + f2 / c)(u0, t) dt - c2).
InitialFunctions initial_functions(const DeterminingData& data, const Tolerances& tol = {});

struct InitialLines {
  std::vector<double> u, g1, v, g2;
};

/// g1 and g2 sampled on the output lattice.
InitialLines g_initial(const DeterminingData& data, const Tolerances& tol = {});

struct CauchySolution {
  Lattice lattice;
  GridField phi, psi;
};

/// phi_v = f1 phi + f2 psi, psi_u = f3 phi + f4 psi with phi(., v0) = g1, psi(u0, .) = g2.
/// Implicit trapezoid marching outward from the base node in each quadrant. With `richardson`,
/// the lattice is also solved at half spacing and the two are combined at the shared nodes.
CauchySolution solve_cauchy(const FProvider& f, const Lattice& lattice, Point2 base, const LineFunction& g1,
                            const LineFunction& g2, bool richardson = true);

/// Solution on data.lattice.refined(refine).
CauchySolution solve_cauchy(const DeterminingData& data, const Tolerances& tol = {}, bool richardson = true,
                            int refine = 1);

struct CompatibilityResidual {
  GridField gauss;   // normalized residual of the Gauss-type equation
  GridField normal;  // normalized residual of the normal-curvature-type equation
  double max_abs() const;
};

/// Residuals of the two compatibility equations on the solution's lattice, outer derivatives by stencils.
/// Each residual is |L - R| / max(1, |L|, |R|).
CompatibilityResidual compatibility_residual(const DeterminingData& data, const CauchySolution& sol,
                                             const Tolerances& tol = {});

struct BetaGrids {
  GridField beta1, beta2;
};

BetaGrids recover_beta(const DeterminingData& data, const CauchySolution& sol, const Tolerances& tol = {});

/// Position and the orthonormal frame (rows x, y, b, l).
struct FrameState {
  Eigen::Vector4d z = Eigen::Vector4d::Zero();
  Eigen::Matrix4d frame = Eigen::Matrix4d::Identity();
};

struct FrameGrid {
  Lattice lattice;
  std::vector<Vec4> z, x, y, b, l;
  GridField phi, psi, beta1, beta2;
  GridField commutation;  // |z(row first) - z(column first)| per node
  double commutation_max = 0;
  double max_drift = 0;        // largest Gram deviation before re-projection
  double max_gram_error = 0;   // largest Gram deviation after re-projection
};

/// RK4 along the base row, then along each column. The solution must live on lattice.refined(k)
/// with k even, so that step midpoints are nodes.
FrameGrid integrate_frame(const DeterminingData& data, const CauchySolution& sol, const FrameState& initial,
                          const Tolerances& tol = {});

struct ReconstructOptions {
  FrameState initial;
  bool force = false;       // proceed when the compatibility gate fails
  bool richardson = true;
};

struct Reconstruction {
  FrameGrid grid;
  CompatibilityResidual compat;  // on the output lattice
  double compat_max = 0;
  bool compat_passed = true;
  Domain valid;  // largest node rectangle around the base passing the residual checks
};

/// Full pipeline. Throws CompatibilityGate when the residual exceeds tol_compat and `force` is off.
Reconstruction reconstruct(const DeterminingData& data, const ReconstructOptions& options = {},
                           const Tolerances& tol = {});

struct RigidMotion {
  Eigen::Matrix4d Q = Eigen::Matrix4d::Identity();
  Eigen::Vector4d t = Eigen::Vector4d::Zero();
  double rms = 0;
  bool reflection = false;
};

/// Q, t minimizing sum |Q a_i + t - b_i|^2. Pairs with a non-finite entry are skipped.
/// Proper and improper motions are both tried; the lower rms wins.
RigidMotion align_rigid(const std::vector<Vec4>& a, const std::vector<Vec4>& b);

/// Root-mean-square distance of Q a_i + t from b_i.
double motion_rms(const RigidMotion& m, const std::vector<Vec4>& a, const std::vector<Vec4>& b);

/// Positions of a chart on a lattice (v-major).
std::vector<Vec4> sample_positions(const Chart& chart, const Lattice& lattice);

}  // namespace canon4
