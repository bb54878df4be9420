#include "canon4/canonize.hpp"

#include <algorithm>
#include <cmath>

namespace canon4 {

FFields f_fields(const D1& n1, const D1& n2, const D1& la, const D1& mu, const Tolerances& tol, Point2 where) {
  const D1 L2 = la * la, M2 = mu * mu, N1 = n1 * n1, N2 = n2 * n2;
  const D1 Q = (L2 + M2) * (L2 + M2);
  const double l = la.v, a = n1.v, b = n2.v, m2 = M2.v, l2 = L2.v;
  // u-partials are d[0], v-partials d[1]
  FFields f;
  f.denom = 4 * (l2 + m2) * (l2 + m2) + (l2 - 2 * m2 - a * b) * (a - b) * (a - b) - 4 * l2 * a * b;
  if (!(std::abs(f.denom) > tol.eps_denom))
    throw Error(ErrorKind::DegenerateDenominator, "f-field denominator " + fmt_num(f.denom) + " below threshold",
                where);
  const double num1 = 0.5 * Q.d[1] - L2.d[1] * a * b + 2 * m2 * b * n1.d[1] +
                      (l2 * n1.d[1] - 0.5 * M2.d[1] * a - 0.5 * N1.d[1] * b) * (a - b);
  const double num2 = la.d[0] * (l2 - a * b) * (a - b) + 2 * la.d[0] * m2 * b + 2 * l * l2 * n2.d[0] +
                      0.5 * l * M2.d[0] * (a - 3 * b) + 2 * l * m2 * n2.d[0] - l * a * N2.d[0];
  const double num3 = la.d[1] * (l2 - a * b) * (b - a) + 2 * la.d[1] * m2 * a + 2 * l * l2 * n1.d[1] +
                      0.5 * l * M2.d[1] * (b - 3 * a) + 2 * l * m2 * n1.d[1] - l * N1.d[1] * b;
  const double num4 = 0.5 * Q.d[0] - L2.d[0] * a * b + 2 * m2 * a * n2.d[0] +
                      (l2 * n2.d[0] - 0.5 * M2.d[0] * b - 0.5 * a * N2.d[0]) * (b - a);
  f.f1 = -num1 / f.denom;
  f.f2 = num2 / f.denom;
  f.f3 = num3 / f.denom;
  f.f4 = -num4 / f.denom;
  return f;
}

FFields f_fields(const GeoRecord<D1>& g, const Tolerances& tol, Point2 where) {
  return f_fields(g.nu1, g.nu2, g.lambda, g.mu, tol, where);
}

// --- patches -------------------------------------------------------------------

PatchSample ChartPatch::sample(double u, double v) const {
  require_principal_point(chart_, u, v, tol_);
  const auto level = geo_level<D1>(chart_, u, v);
  const auto rec = lower(level);
  PatchSample s;
  s.sqrtE = level.frame.sqrtE.v;
  s.sqrtG = level.frame.sqrtG.v;
  s.nu1 = level.nu1;
  s.nu2 = level.nu2;
  s.lambda = level.lambda;
  s.mu = level.mu;
  s.beta1 = rec.beta1;
  s.beta2 = rec.beta2;
  s.f = f_fields(s.nu1, s.nu2, s.lambda, s.mu, tol_, {u, v});
  return s;
}

Vec4 ChartPatch::position(double u, double v) const {
  Vec4 z;
  for (int k = 0; k < 4; ++k) z[k] = evaluate(chart_.coords[k], u, v);
  return z;
}

PatchSample FieldPatch::sample(double u, double v) const {
  D1 d[6];
  for (int k = 0; k < 6; ++k) d[k] = evaluate_seeded<D1>(fields_[k], u, v);
  if (!(d[0].v > 0) || !(d[1].v > 0))
    throw Error(ErrorKind::NonPositive, "sqrt(E) and sqrt(G) must be positive", Point2{u, v});
  if (!(std::abs(d[5].v) > tol_.eps_min)) throw Error(ErrorKind::MinimalPoint, "mu vanishes", Point2{u, v});
  PatchSample s;
  s.sqrtE = d[0].v;
  s.sqrtG = d[1].v;
  s.nu1 = d[2];
  s.nu2 = d[3];
  s.lambda = d[4];
  s.mu = d[5];
  GeoRecord<D1> g;
  g.E = d[0] * d[0];
  g.G = d[1] * d[1];
  g.nu1 = d[2];
  g.nu2 = d[3];
  g.lambda = d[4];
  g.mu = d[5];
  const auto b = beta_from_mu_relations(g);
  s.beta1 = b[0];
  s.beta2 = b[1];
  s.f = f_fields(s.nu1, s.nu2, s.lambda, s.mu, tol_, {u, v});
  return s;
}

Vec4 FieldPatch::position(double u, double v) const {
  throw Error(ErrorKind::Input, "field data carries no embedding", Point2{u, v});
}

// --- monotone maps ---------------------------------------------------------------

namespace {

double hermite_slope(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& dy,
                     double t) {
  const std::size_t n = x.size();
  if (n == 1) return dy[0];
  std::size_t k = std::upper_bound(x.begin(), x.end(), t) - x.begin();
  k = std::clamp<std::size_t>(k, 1, n - 1) - 1;
  const double h = x[k + 1] - x[k];
  const double s = (t - x[k]) / h;
  const double s2 = s * s;
  const double d00 = 6 * s2 - 6 * s, d10 = 3 * s2 - 4 * s + 1;
  const double d01 = -6 * s2 + 6 * s, d11 = 3 * s2 - 2 * s;
  return (d00 * y[k] + d01 * y[k + 1]) / h + d10 * dy[k] + d11 * dy[k + 1];
}

}  // namespace

MonotoneMap::MonotoneMap(std::vector<double> x, std::vector<double> y, std::vector<double> slope)
    : x_(std::move(x)), y_(std::move(y)), s_(std::move(slope)) {
  if (x_.size() < 2 || x_.size() != y_.size() || x_.size() != s_.size())
    throw Error(ErrorKind::Input, "monotone map needs at least two matching samples");
  for (std::size_t k = 0; k < x_.size(); ++k) {
    if (!(s_[k] > 0) || !std::isfinite(s_[k]))
      throw Error(ErrorKind::NonMonotone, "map derivative " + fmt_num(s_[k]) + " is not positive", Point2{x_[k], 0});
    if (k > 0 && !(y_[k] > y_[k - 1]))
      throw Error(ErrorKind::NonMonotone, "map values are not increasing", Point2{x_[k], 0});
  }
  inv_s_.resize(s_.size());
  for (std::size_t k = 0; k < s_.size(); ++k) inv_s_[k] = 1.0 / s_[k];
}

double MonotoneMap::forward(double x) const { return hermite(x_, y_, s_, x); }

double MonotoneMap::slope(double x) const { return hermite_slope(x_, y_, s_, x); }

double MonotoneMap::inverse(double y) const {
  double t = hermite(y_, x_, inv_s_, y);
  for (int it = 0; it < 4; ++it) {
    const double r = forward(t) - y;
    t -= r / slope(t);
    if (std::abs(r) < 1e-15 * std::max(1.0, std::abs(y))) break;
  }
  return t;
}

ReparametrizedPatch::ReparametrizedPatch(std::shared_ptr<const PrincipalPatch> base, MonotoneMap map_u,
                                         MonotoneMap map_v)
    : base_(std::move(base)), map_u_(std::move(map_u)), map_v_(std::move(map_v)) {}

Domain ReparametrizedPatch::domain() const { return {map_u_.y_min(), map_u_.y_max(), map_v_.y_min(), map_v_.y_max()}; }

Point2 ReparametrizedPatch::original(double u, double v) const { return {map_u_.inverse(u), map_v_.inverse(v)}; }

PatchSample ReparametrizedPatch::sample(double u, double v) const {
  const Point2 p = original(u, v);
  PatchSample s = base_->sample(p.u, p.v);
  const double du = 1.0 / map_u_.slope(p.u), dv = 1.0 / map_v_.slope(p.v);
  s.sqrtE *= du;
  s.sqrtG *= dv;
  s.f.f1 *= dv;
  s.f.f2 *= du;
  s.f.f3 *= dv;
  s.f.f4 *= du;
  for (D1* x : {&s.nu1, &s.nu2, &s.lambda, &s.mu}) {
    x->d[0] *= du;
    x->d[1] *= dv;
  }
  return s;
}

Vec4 ReparametrizedPatch::position(double u, double v) const {
  const Point2 p = original(u, v);
  return base_->position(p.u, p.v);
}

// --- phi, psi --------------------------------------------------------------------

namespace {

double b_integrand(const PatchSample& s) { return s.f.f3 * s.sqrtE / s.sqrtG + s.f.f4; }
double a_integrand(const PatchSample& s) { return s.f.f1 + s.f.f2 * s.sqrtG / s.sqrtE; }

std::vector<double> slices(double lo, double hi, int n) {
  std::vector<double> s(n);
  for (int k = 0; k < n; ++k) s[k] = n == 1 ? lo : lo + (hi - lo) * k / (n - 1);
  return s;
}

}  // namespace

CanonicalConstants resolve_constants(const PrincipalPatch& patch, Point2 base, const CanonicalConstants& c) {
  if (!c.normalize_at_base) return c;
  const auto s = patch.sample(base.u, base.v);
  return {-std::log(s.sqrtE), -std::log(s.sqrtG), false};
}

CanonicalReport phi_psi(const PrincipalPatch& patch, Point2 base, const CanonicalConstants& constants,
                        const Lattice& lattice, const Tolerances& tol) {
  lattice.validate();
  const Domain d = patch.domain();
  if (!d.contains(base.u, base.v)) throw Error(ErrorKind::IntegrationDomain, "base point outside the domain", base);
  if (!d.contains(lattice.bounds.u_min, lattice.bounds.v_min) || !d.contains(lattice.bounds.u_max, lattice.bounds.v_max))
    throw Error(ErrorKind::IntegrationDomain, "lattice exceeds the patch domain");
  const CanonicalConstants c = resolve_constants(patch, base, constants);
  CanonicalReport r;
  r.c1 = c.c1;
  r.c2 = c.c2;
  r.base_point = base;
  r.u.resize(lattice.nu);
  r.v.resize(lattice.nv);
  for (int i = 0; i < lattice.nu; ++i) r.u[i] = lattice.u(i);
  for (int j = 0; j < lattice.nv; ++j) r.v[j] = lattice.v(j);
  const auto vs = slices(d.v_min, d.v_max, 5);
  const auto us = slices(d.u_min, d.u_max, 5);

  const auto B = cumulative_from([&](double t) { return b_integrand(patch.sample(t, base.v)); }, base.u, r.u, 16);
  r.phi.resize(lattice.nu);
  for (int i = 0; i < lattice.nu; ++i) {
    double lo = INFINITY, hi = -INFINITY, sum = 0;
    for (double v : vs) {
      const double A = integrate([&](double t) { return a_integrand(patch.sample(r.u[i], t)); }, base.v, v, 16);
      const double val = patch.sample(r.u[i], v).sqrtE * std::exp(-A - B[i] + c.c1);
      lo = std::min(lo, val);
      hi = std::max(hi, val);
      sum += val;
    }
    r.phi[i] = sum / vs.size();
    r.phi_spread = std::max(r.phi_spread, (hi - lo) / std::abs(r.phi[i]));
  }

  const auto A0 = cumulative_from([&](double t) { return a_integrand(patch.sample(base.u, t)); }, base.v, r.v, 16);
  r.psi.resize(lattice.nv);
  for (int j = 0; j < lattice.nv; ++j) {
    double lo = INFINITY, hi = -INFINITY, sum = 0;
    for (double u : us) {
      const double Bu = integrate([&](double t) { return b_integrand(patch.sample(t, r.v[j])); }, base.u, u, 16);
      const double val = patch.sample(u, r.v[j]).sqrtG * std::exp(-Bu - A0[j] + c.c2);
      lo = std::min(lo, val);
      hi = std::max(hi, val);
      sum += val;
    }
    r.psi[j] = sum / us.size();
    r.psi_spread = std::max(r.psi_spread, (hi - lo) / std::abs(r.psi[j]));
  }

  if (r.phi_spread > tol.tol_spread || r.psi_spread > tol.tol_spread)
    throw Error(ErrorKind::ConstancyViolation, "phi/psi depend on the other variable (relative spread " +
                                                   fmt_num(std::max(r.phi_spread, r.psi_spread)) + ")");
  for (double x : r.phi) r.max_deviation = std::max(r.max_deviation, std::abs(x - 1));
  for (double x : r.psi) r.max_deviation = std::max(r.max_deviation, std::abs(x - 1));
  r.is_canonical = r.max_deviation < tol.tol_canon;
  return r;
}

// --- canonize ----------------------------------------------------------------------

namespace {

// Knots on [lo, hi] containing x0, and the map y = x0 + int_{x0}^{x} rate, with rate sampled at the knots.
MonotoneMap build_map(double lo, double hi, double x0, int samples, const std::function<std::vector<double>(
                                                                          const std::vector<double>&)>& rate_at) {
  std::vector<double> xs, ys, rs;
  const double len = hi - lo;
  // knots from x0 towards `end`, first knot x0
  auto side = [&](double end) {
    const double part = std::abs(end - x0);
    if (part <= 0) return std::vector<double>{x0};
    const int n = std::max(8, static_cast<int>(std::lround(samples * part / len)));
    std::vector<double> k(n + 1);
    for (int i = 0; i <= n; ++i) k[i] = x0 + (end - x0) * i / n;
    k[n] = end;
    return k;
  };
  const auto left = side(lo), right = side(hi);
  auto integrate_side = [&](const std::vector<double>& knots, std::vector<double>& rate, std::vector<double>& val) {
    rate = rate_at(knots);
    val.assign(knots.size(), x0);
    if (knots.size() < 2) return;
    const auto cum = cumulative_integral(rate, knots[1] - knots[0], 0);
    for (std::size_t i = 0; i < knots.size(); ++i) val[i] = x0 + cum[i];
  };
  std::vector<double> rl, vl, rr, vr;
  integrate_side(left, rl, vl);
  integrate_side(right, rr, vr);
  for (std::size_t i = left.size(); i-- > 1;) {
    xs.push_back(left[i]);
    ys.push_back(vl[i]);
    rs.push_back(rl[i]);
  }
  for (std::size_t i = 0; i < right.size(); ++i) {
    xs.push_back(right[i]);
    ys.push_back(vr[i]);
    rs.push_back(rr[i]);
  }
  return MonotoneMap(xs, ys, rs);
}

}  // namespace

CanonizeResult canonize_transform(std::shared_ptr<const PrincipalPatch> patch, Point2 base,
                                  const CanonicalConstants& constants, const Tolerances& tol, int samples) {
  (void)tol;
  const Domain d = patch->domain();
  if (!d.contains(base.u, base.v)) throw Error(ErrorKind::IntegrationDomain, "base point outside the domain", base);
  const CanonicalConstants c = resolve_constants(*patch, base, constants);

  auto phi_at = [&](const std::vector<double>& us) {
    const auto B = cumulative_from([&](double t) { return b_integrand(patch->sample(t, base.v)); }, base.u, us, 1);
    std::vector<double> out(us.size());
    for (std::size_t i = 0; i < us.size(); ++i)
      out[i] = patch->sample(us[i], base.v).sqrtE * std::exp(-B[i] + c.c1);
    return out;
  };
  auto psi_at = [&](const std::vector<double>& vs) {
    const auto A = cumulative_from([&](double t) { return a_integrand(patch->sample(base.u, t)); }, base.v, vs, 1);
    std::vector<double> out(vs.size());
    for (std::size_t j = 0; j < vs.size(); ++j)
      out[j] = patch->sample(base.u, vs[j]).sqrtG * std::exp(-A[j] + c.c2);
    return out;
  };
  CanonizeResult r;
  r.c1 = c.c1;
  r.c2 = c.c2;
  r.map_u = build_map(d.u_min, d.u_max, base.u, samples, phi_at);
  r.map_v = build_map(d.v_min, d.v_max, base.v, samples, psi_at);
  r.patch = std::make_shared<ReparametrizedPatch>(std::move(patch), r.map_u, r.map_v);
  return r;
}

// --- principal rotation ----------------------------------------------------------------

Chart principal_rotation(const Chart& chart, const Lattice& lattice, const Tolerances& tol) {
  lattice.validate();
  for (int j = 0; j < lattice.nv; ++j)
    for (int i = 0; i < lattice.nu; ++i) {
      const double u = lattice.u(i), v = lattice.v(j);
      const auto f = fundamental_forms(chart, u, v, tol);
      const double scale = std::max(1.0, std::abs(f.M));
      const bool ok = std::abs(f.F) / std::sqrt(f.E * f.G) < tol.tol_principal &&
                      std::abs(f.E - f.G) / (f.E + f.G) < tol.tol_principal &&
                      std::abs(f.L) < tol.tol_principal * scale && std::abs(f.N) < tol.tol_principal * scale;
      if (!ok)
        throw Error(ErrorKind::PatternNotApplicable,
                    "rotation needs E = G, F = 0, L = N = 0; supply a principal chart instead", Point2{u, v});
      if (std::abs(f.M) < tol.tol_principal)
        throw Error(ErrorKind::PatternNotApplicable, "M vanishes: the chart is already principal here; supply it as is",
                    Point2{u, v});
    }
  Chart r = chart;
  r.name = chart.name.empty() ? "rotated" : chart.name + "_rotated";
  const Expression su = Expression::u() + Expression::v(), sv = Expression::u() - Expression::v();
  for (auto& e : r.coords) e = substitute(e, su, sv);
  const Domain& d = chart.domain;
  const double cu = 0.5 * (d.u_min + d.u_max), cv = 0.5 * (d.v_min + d.v_max);
  const double half = 0.25 * std::min(d.u_max - d.u_min, d.v_max - d.v_min);
  const double nu_c = 0.5 * (cu + cv), nv_c = 0.5 * (cu - cv);
  r.domain = {nu_c - half, nu_c + half, nv_c - half, nv_c + half};
  Lattice check = lattice;
  check.bounds = r.domain;
  if (!is_principal(r, check, tol).principal)
    throw Error(ErrorKind::PatternNotApplicable, "rotated chart is not principal");
  return r;
}

// --- PNMCVF specialization ---------------------------------------------------------------

PnmcvReport pnmcv_check(const PrincipalPatch& patch, Point2 base, const Lattice& lattice, const Tolerances& tol,
                        double precondition_tol) {
  lattice.validate();
  PnmcvReport r;
  for (int j = 0; j < lattice.nv; ++j)
    for (int i = 0; i < lattice.nu; ++i) {
      const auto s = patch.sample(lattice.u(i), lattice.v(j));
      r.max_beta = std::max({r.max_beta, std::abs(s.beta1), std::abs(s.beta2)});
      r.max_nu_gap = std::max(r.max_nu_gap, std::abs(s.nu1.v - s.nu2.v));
      const double A = a_integrand(s), B = b_integrand(s);
      const double mv = s.mu.d[1] / s.mu.v, mu_ = s.mu.d[0] / s.mu.v;
      r.identity_v = std::max(r.identity_v, std::abs(A + 0.5 * mv));
      r.identity_u = std::max(r.identity_u, std::abs(B + 0.5 * mu_));
      r.variant_identity_v = std::max(r.variant_identity_v, std::abs(A + mv));
      r.variant_identity_u = std::max(r.variant_identity_u, std::abs(B + mu_));
    }
  if (r.max_beta > precondition_tol || r.max_nu_gap > precondition_tol)
    throw Error(ErrorKind::NotPnmcvf, "not a PNMCVF surface: max |beta| = " + fmt_num(r.max_beta) +
                                          ", max |nu1 - nu2| = " + fmt_num(r.max_nu_gap));
  const auto s0 = patch.sample(base.u, base.v);
  const double m0 = std::abs(s0.mu.v);
  auto gaps = [&](double c) {
    const auto rep = phi_psi(patch, base, {c, c, false}, lattice, tol);
    double gp = 0, gs = 0;
    for (int i = 0; i < lattice.nu; ++i) {
      const auto s = patch.sample(rep.u[i], base.v);
      gp = std::max(gp, std::abs(rep.phi[i] - s.sqrtE * std::sqrt(std::abs(s.mu.v))));
    }
    for (int j = 0; j < lattice.nv; ++j) {
      const auto s = patch.sample(base.u, rep.v[j]);
      gs = std::max(gs, std::abs(rep.psi[j] - s.sqrtG * std::sqrt(std::abs(s.mu.v))));
    }
    return std::pair{gp, gs};
  };
  std::tie(r.phi_gap, r.psi_gap) = gaps(std::log(std::sqrt(m0)));
  std::tie(r.phi_gap_variant, r.psi_gap_variant) = gaps(std::log(m0));
  return r;
}

}  // namespace canon4
