#pragma once

#include <memory>
#include <vector>

#include "canon4/geomfun.hpp"

namespace canon4 {

struct FFields {
  double f1 = 0, f2 = 0, f3 = 0, f4 = 0;
  double denom = 0;
};

/// The four quotients built from nu1, nu2, lambda, mu and their first partials.
/// Throws DegenerateDenominator (located at `where`) when |denom| <= eps_denom.
FFields f_fields(const D1& nu1, const D1& nu2, const D1& lambda, const D1& mu, const Tolerances& tol,
                 Point2 where = {});
FFields f_fields(const GeoRecord<D1>& gf, const Tolerances& tol, Point2 where = {});

/// What the canonical-parameter machinery needs at one point of a principal patch.
struct PatchSample {
  double sqrtE = 0, sqrtG = 0;
  FFields f;
  D1 nu1, nu2, lambda, mu;
  double beta1 = 0, beta2 = 0;
};

/// A principal, non-minimal parametrized patch, sampled pointwise.
class PrincipalPatch {
 public:
  virtual ~PrincipalPatch() = default;
  virtual Domain domain() const = 0;
  virtual PatchSample sample(double u, double v) const = 0;
  virtual bool has_position() const { return true; }
  virtual Vec4 position(double u, double v) const = 0;
};

/// Samples an analytic chart through its jets.
class ChartPatch : public PrincipalPatch {
 public:
  explicit ChartPatch(Chart chart, Tolerances tol = {}) : chart_(std::move(chart)), tol_(tol) {}
  Domain domain() const override { return chart_.domain; }
  PatchSample sample(double u, double v) const override;
  Vec4 position(double u, double v) const override;
  const Chart& chart() const { return chart_; }

 private:
  Chart chart_;
  Tolerances tol_;
};

/// Fields given directly as expressions (sqrt E, sqrt G, nu1, nu2, lambda, mu), with no embedding.
/// beta1 and beta2 follow from the mu*beta relations.
class FieldPatch : public PrincipalPatch {
 public:
  FieldPatch(std::array<Expression, 6> fields, Domain domain, Tolerances tol = {})
      : fields_(std::move(fields)), domain_(domain), tol_(tol) {}
  Domain domain() const override { return domain_; }
  PatchSample sample(double u, double v) const override;
  bool has_position() const override { return false; }
  Vec4 position(double u, double v) const override;

 private:
  std::array<Expression, 6> fields_;
  Domain domain_;
  Tolerances tol_;
};

/// Increasing map x -> y sampled at knots with exact slopes; cubic Hermite both ways,
/// with the inverse polished by Newton steps on the forward interpolant.
class MonotoneMap {
 public:
  MonotoneMap() = default;
  MonotoneMap(std::vector<double> x, std::vector<double> y, std::vector<double> slope);

  double forward(double x) const;
  double inverse(double y) const;
  /// dy/dx at x.
  double slope(double x) const;
  double x_min() const { return x_.front(); }
  double x_max() const { return x_.back(); }
  double y_min() const { return y_.front(); }
  double y_max() const { return y_.back(); }
  const std::vector<double>& knots() const { return x_; }
  const std::vector<double>& values() const { return y_; }

 private:
  std::vector<double> x_, y_, s_, inv_s_;
};

/// A base patch composed with monotone maps: new coordinates (U, V) with u = map_u^{-1}(U).
class ReparametrizedPatch : public PrincipalPatch {
 public:
  ReparametrizedPatch(std::shared_ptr<const PrincipalPatch> base, MonotoneMap map_u, MonotoneMap map_v);
  Domain domain() const override;
  PatchSample sample(double u, double v) const override;
  bool has_position() const override { return base_->has_position(); }
  Vec4 position(double u, double v) const override;
  /// Original parameters of a new-coordinate point.
  Point2 original(double u, double v) const;
  const MonotoneMap& map_u() const { return map_u_; }
  const MonotoneMap& map_v() const { return map_v_; }

 private:
  std::shared_ptr<const PrincipalPatch> base_;
  MonotoneMap map_u_, map_v_;
};

/// Integration constants. With normalize_at_base, c1 and c2 are chosen so that phi(u0) = psi(v0) = 1.
struct CanonicalConstants {
  double c1 = 0.0, c2 = 0.0;
  bool normalize_at_base = false;
};

struct CanonicalReport {
  std::vector<double> u, phi;  // phi sampled at u nodes (mean over the v-slices)
  std::vector<double> v, psi;
  double c1 = 0, c2 = 0;
  Point2 base_point;
  bool is_canonical = false;
  double max_deviation = 0;  // max(|phi - 1|, |psi - 1|)
  double phi_spread = 0;     // relative spread of phi over the v-slices
  double psi_spread = 0;
};

/// Resolves normalize-at-base against the patch.
CanonicalConstants resolve_constants(const PrincipalPatch& patch, Point2 base, const CanonicalConstants& c);

/// phi and psi on the nodes of `lattice`, each evaluated on five slices of the other variable.
/// Throws ConstancyViolation if the slices disagree by more than tol_spread.
CanonicalReport phi_psi(const PrincipalPatch& patch, Point2 base, const CanonicalConstants& constants,
                        const Lattice& lattice, const Tolerances& tol = {});

struct CanonizeResult {
  std::shared_ptr<const ReparametrizedPatch> patch;
  MonotoneMap map_u, map_v;  // old -> new coordinate
  double c1 = 0, c2 = 0;
};

/// New coordinates U(u) = u0 + int_{u0}^u phi, V(v) = v0 + int_{v0}^v psi.
CanonizeResult canonize_transform(std::shared_ptr<const PrincipalPatch> patch, Point2 base,
                                  const CanonicalConstants& constants, const Tolerances& tol = {},
                                  int samples = 1024);

/// For charts with E = G, F = 0, L = N = 0 on the lattice: substitute u -> u + v, v -> u - v.
/// Throws PatternNotApplicable otherwise (including charts that are already principal).
Chart principal_rotation(const Chart& chart, const Lattice& lattice, const Tolerances& tol = {});

struct PnmcvReport {
  double max_beta = 0;         // max |beta1|, |beta2|
  double max_nu_gap = 0;       // max |nu1 - nu2|
  double identity_v = 0;       // max |f1 + sqrt(G/E) f2 + mu_v/(2 mu)|
  double identity_u = 0;       // max |sqrt(E/G) f3 + f4 + mu_u/(2 mu)|
  double variant_identity_v = 0;  // same with -mu_v/mu on the right
  double variant_identity_u = 0;
  double phi_gap = 0;          // max |phi - sqrt(E) sqrt|mu|| with c1 = ln sqrt|mu(u0, v0)|
  double psi_gap = 0;
  double phi_gap_variant = 0;  // with c1 = ln |mu(u0, v0)|
  double psi_gap_variant = 0;
};

/// Checks the parallel-normalized-mean-curvature specialization on a lattice.
/// Throws NotPnmcvf when beta1, beta2 or nu1 - nu2 exceed `precondition_tol`.
PnmcvReport pnmcv_check(const PrincipalPatch& patch, Point2 base, const Lattice& lattice, const Tolerances& tol = {},
                        double precondition_tol = 1e-6);

}  // namespace canon4
