#include "canon4/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace canon4 {

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

// The Cauchy problem is solved on the output lattice refined by this factor: frame steps
// take their midpoints from it and the compatibility stencils gain accuracy.
const int kWorkRefinement = 4;

Point2 node(const Lattice& lat, int i, int j) { return {lat.u(i), lat.v(j)}; }

// Index of a coarse node on a lattice refined by `factor` (single-node axes stay at 0).
int fine_index(int i, int n, int factor) { return n > 1 ? i * factor : 0; }

std::vector<double> u_nodes(const Lattice& lat) {
  std::vector<double> r(lat.nu);
  for (int i = 0; i < lat.nu; ++i) r[i] = lat.u(i);
  return r;
}

std::vector<double> v_nodes(const Lattice& lat) {
  std::vector<double> r(lat.nv);
  for (int j = 0; j < lat.nv; ++j) r[j] = lat.v(j);
  return r;
}

std::pair<int, int> base_node(const Lattice& lat, Point2 base) {
  const int i0 = lat.node_u(base.u), j0 = lat.node_v(base.v);
  if (i0 < 0 || j0 < 0)
    throw Error(ErrorKind::IntegrationDomain, "base point is not a node of the lattice", base);
  return {i0, j0};
}

void check_data(const DeterminingData& data) {
  if (!data.source) throw Error(ErrorKind::Input, "determining data has no source");
  data.lattice.validate();
  base_node(data.lattice, data.base);
  if (const auto d = data.source->domain()) {
    const Domain& b = data.lattice.bounds;
    if (!d->contains(b.u_min, b.v_min) || !d->contains(b.u_max, b.v_max))
      throw Error(ErrorKind::IntegrationDomain, "lattice exceeds the region where the data is defined");
  }
}

// Lagrange weights for cubic (or lower) interpolation on n equally spaced samples.
void lagrange_window(double x, double lo, double h, int n, int& first, int& count, double w[4]) {
  count = std::min(n, 4);
  if (n == 1) {
    first = 0;
    w[0] = 1;
    return;
  }
  const double t = (x - lo) / h;
  first = std::clamp(static_cast<int>(std::floor(t)) - (count == 4 ? 1 : 0), 0, n - count);
  for (int a = 0; a < count; ++a) {
    double p = 1;
    for (int b = 0; b < count; ++b)
      if (b != a) p *= (t - (first + b)) / static_cast<double>(a - b);
    w[a] = p;
  }
}

}  // namespace

// --- data sources -------------------------------------------------------------------

DataJet ExpressionSource::at(double u, double v) const {
  return {evaluate_seeded<D1>(f_[0], u, v), evaluate_seeded<D1>(f_[1], u, v), evaluate_seeded<D1>(f_[2], u, v),
          evaluate_seeded<D1>(f_[3], u, v)};
}

DataJet ChartSource::at(double u, double v) const {
  require_principal_point(chart_, u, v, tol_);
  const auto g = geo_level<D1>(chart_, u, v);
  return {g.nu1, g.nu2, g.lambda, g.mu};
}

GridSource::GridSource(std::array<GridField, 4> fields) : fields_(std::move(fields)) {
  const Lattice& lat = fields_[0].lattice;
  lat.validate();
  for (int k = 0; k < 4; ++k) {
    const Lattice& o = fields_[k].lattice;
    if (o.nu != lat.nu || o.nv != lat.nv || fields_[k].values.size() != lat.size())
      throw Error(ErrorKind::ShapeMismatch, "data grids have different shapes");
    du_[k] = diff_u(fields_[k]);
    dv_[k] = diff_v(fields_[k]);
  }
}

double GridSource::interp(const GridField& f, double u, double v) const {
  const Lattice& L = f.lattice;
  int fi, ni, fj, nj;
  double wu[4], wv[4];
  lagrange_window(u, L.bounds.u_min, L.hu(), L.nu, fi, ni, wu);
  lagrange_window(v, L.bounds.v_min, L.hv(), L.nv, fj, nj, wv);
  double s = 0;
  for (int b = 0; b < nj; ++b)
    for (int a = 0; a < ni; ++a) s += wu[a] * wv[b] * f.at(fi + a, fj + b);
  return s;
}

DataJet GridSource::at(double u, double v) const {
  D1 out[4];
  for (int k = 0; k < 4; ++k) out[k] = D1(interp(fields_[k], u, v), interp(du_[k], u, v), interp(dv_[k], u, v));
  return {out[0], out[1], out[2], out[3]};
}

double DeterminingData::ratio() const { return c ? *c : std::exp(c2 - c1); }

// --- Cauchy problem -----------------------------------------------------------------

FProvider f_provider(const DeterminingData& data, const Tolerances& tol) {
  auto src = data.source;
  return [src, tol](double u, double v) {
    const DataJet j = src->at(u, v);
    if (!(std::abs(j.mu.v) > tol.eps_min))
      throw Error(ErrorKind::MinimalPoint, "mu vanishes: the data describes a minimal point", Point2{u, v});
    return f_fields(j.nu1, j.nu2, j.lambda, j.mu, tol, {u, v});
  };
}

InitialFunctions initial_functions(const DeterminingData& data, const Tolerances& tol) {
  const FProvider f = f_provider(data, tol);
  const double c = data.ratio(), c1 = data.c1, c2 = data.c2;
  const Point2 b = data.base;
  InitialFunctions g;
  g.g1 = [=](const std::vector<double>& us) {
    auto r = cumulative_from([&](double t) {
      const FFields x = f(t, b.v);
      return c * x.f3 + x.f4;
    }, b.u, us);
    for (double& x : r) x = std::exp(x - c1);
    return r;
  };
  g.g2 = [=](const std::vector<double>& vs) {
    auto r = cumulative_from([&](double t) {
      const FFields x = f(b.u, t);
      return x.f1 + x.f2 / c;
    }, b.v, vs);
    for (double& x : r) x = std::exp(x - c2);
    return r;
  };
  return g;
}

InitialLines g_initial(const DeterminingData& data, const Tolerances& tol) {
  check_data(data);
  const auto g = initial_functions(data, tol);
  InitialLines r;
  r.u = u_nodes(data.lattice);
  r.v = v_nodes(data.lattice);
  r.g1 = g.g1(r.u);
  r.g2 = g.g2(r.v);
  return r;
}

namespace {

CauchySolution solve_level(const FProvider& f, const Lattice& lat, int i0, int j0, const LineFunction& g1,
                           const LineFunction& g2) {
  std::vector<FFields> F(lat.size());
  for (int j = 0; j < lat.nv; ++j)
    for (int i = 0; i < lat.nu; ++i) F[lat.index(i, j)] = f(lat.u(i), lat.v(j));
  CauchySolution s{lat, GridField(lat, kNaN), GridField(lat, kNaN)};
  const auto G1 = g1(u_nodes(lat));
  const auto G2 = g2(v_nodes(lat));
  for (int i = 0; i < lat.nu; ++i) s.phi.at(i, j0) = G1[i];
  for (int j = 0; j < lat.nv; ++j) s.psi.at(i0, j) = G2[j];
  auto rate_phi = [&](int i, int j) {
    const FFields& x = F[lat.index(i, j)];
    return x.f1 * s.phi.at(i, j) + x.f2 * s.psi.at(i, j);
  };
  auto rate_psi = [&](int i, int j) {
    const FFields& x = F[lat.index(i, j)];
    return x.f3 * s.phi.at(i, j) + x.f4 * s.psi.at(i, j);
  };
  // base row: psi along v = v0 with phi known; base column: phi along u = u0
  for (int dir : {1, -1}) {
    for (int i = i0 + dir; i >= 0 && i < lat.nu; i += dir) {
      const double b = 0.5 * (lat.u(i) - lat.u(i - dir));
      const FFields& x = F[lat.index(i, j0)];
      s.psi.at(i, j0) = (s.psi.at(i - dir, j0) + b * (rate_psi(i - dir, j0) + x.f3 * s.phi.at(i, j0))) / (1 - b * x.f4);
    }
    for (int j = j0 + dir; j >= 0 && j < lat.nv; j += dir) {
      const double a = 0.5 * (lat.v(j) - lat.v(j - dir));
      const FFields& x = F[lat.index(i0, j)];
      s.phi.at(i0, j) = (s.phi.at(i0, j - dir) + a * (rate_phi(i0, j - dir) + x.f2 * s.psi.at(i0, j))) / (1 - a * x.f1);
    }
  }
  for (int su : {1, -1})
    for (int sv : {1, -1})
      for (int j = j0 + sv; j >= 0 && j < lat.nv; j += sv)
        for (int i = i0 + su; i >= 0 && i < lat.nu; i += su) {
          const double a = 0.5 * (lat.v(j) - lat.v(j - sv)), b = 0.5 * (lat.u(i) - lat.u(i - su));
          const FFields& x = F[lat.index(i, j)];
          const double r1 = s.phi.at(i, j - sv) + a * rate_phi(i, j - sv);
          const double r2 = s.psi.at(i - su, j) + b * rate_psi(i - su, j);
          const double m11 = 1 - a * x.f1, m12 = -a * x.f2, m21 = -b * x.f3, m22 = 1 - b * x.f4;
          const double det = m11 * m22 - m12 * m21;
          if (!(std::abs(det) > 1e-12))
            throw Error(ErrorKind::NonConvergence, "implicit step is singular", node(lat, i, j));
          s.phi.at(i, j) = (r1 * m22 - m12 * r2) / det;
          s.psi.at(i, j) = (m11 * r2 - m21 * r1) / det;
        }
  return s;
}

void require_positive(const CauchySolution& s) {
  const Lattice& lat = s.lattice;
  for (int j = 0; j < lat.nv; ++j)
    for (int i = 0; i < lat.nu; ++i)
      if (!(s.phi.at(i, j) > 0) || !(s.psi.at(i, j) > 0))
        throw Error(ErrorKind::NonPositive,
                    "phi = " + fmt_num(s.phi.at(i, j)) + ", psi = " + fmt_num(s.psi.at(i, j)) + " must be positive",
                    node(lat, i, j));
}

}  // namespace

CauchySolution solve_cauchy(const FProvider& f, const Lattice& lattice, Point2 base, const LineFunction& g1,
                            const LineFunction& g2, bool richardson) {
  lattice.validate();
  const auto [i0, j0] = base_node(lattice, base);
  CauchySolution coarse = solve_level(f, lattice, i0, j0, g1, g2);
  if (richardson && lattice.size() > 1) {
    const Lattice fl = lattice.refined(2);
    const CauchySolution fine =
        solve_level(f, fl, fine_index(i0, lattice.nu, 2), fine_index(j0, lattice.nv, 2), g1, g2);
    for (int j = 0; j < lattice.nv; ++j)
      for (int i = 0; i < lattice.nu; ++i) {
        const int fi = fine_index(i, lattice.nu, 2), fj = fine_index(j, lattice.nv, 2);
        coarse.phi.at(i, j) = (4 * fine.phi.at(fi, fj) - coarse.phi.at(i, j)) / 3;
        coarse.psi.at(i, j) = (4 * fine.psi.at(fi, fj) - coarse.psi.at(i, j)) / 3;
      }
  }
  require_positive(coarse);
  return coarse;
}

CauchySolution solve_cauchy(const DeterminingData& data, const Tolerances& tol, bool richardson, int refine) {
  check_data(data);
  const auto g = initial_functions(data, tol);
  return solve_cauchy(f_provider(data, tol), data.lattice.refined(refine), data.base, g.g1, g.g2, richardson);
}

// --- compatibility and beta -------------------------------------------------------------

namespace {

struct NodeValues {
  DataJet d;
  double phi, psi, phi_v, psi_u, beta1, beta2;
};

NodeValues node_values(const FProvider& f, const DataSource& src, double u, double v, double phi, double psi) {
  NodeValues n;
  n.d = src.at(u, v);
  const FFields x = f(u, v);
  n.phi = phi;
  n.psi = psi;
  n.phi_v = x.f1 * phi + x.f2 * psi;
  n.psi_u = x.f3 * phi + x.f4 * psi;
  const double la = n.d.lambda.v, gap = n.d.nu1.v - n.d.nu2.v, den = n.d.mu.v * phi * psi;
  n.beta1 = (2 * la * n.psi_u - gap * n.phi_v + n.d.lambda.d[0] * psi - n.d.nu1.d[1] * phi) / den;
  n.beta2 = (2 * la * n.phi_v + gap * n.psi_u - n.d.nu2.d[0] * psi + n.d.lambda.d[1] * phi) / den;
  return n;
}

std::vector<NodeValues> all_node_values(const DeterminingData& data, const CauchySolution& sol,
                                        const Tolerances& tol) {
  const FProvider f = f_provider(data, tol);
  const Lattice& lat = sol.lattice;
  std::vector<NodeValues> out(lat.size());
  for (int j = 0; j < lat.nv; ++j)
    for (int i = 0; i < lat.nu; ++i)
      out[lat.index(i, j)] = node_values(f, *data.source, lat.u(i), lat.v(j), sol.phi.at(i, j), sol.psi.at(i, j));
  return out;
}

double normalized_gap(double l, double r) { return std::abs(l - r) / std::max({1.0, std::abs(l), std::abs(r)}); }

}  // namespace

double CompatibilityResidual::max_abs() const { return std::max(gauss.max_abs(), normal.max_abs()); }

CompatibilityResidual compatibility_residual(const DeterminingData& data, const CauchySolution& sol,
                                             const Tolerances& tol) {
  const Lattice& lat = sol.lattice;
  const auto nv = all_node_values(data, sol, tol);
  GridField A(lat), B(lat), P(lat), Q(lat);
  for (std::size_t k = 0; k < nv.size(); ++k) {
    A.values[k] = nv[k].phi_v / nv[k].psi;
    B.values[k] = nv[k].psi_u / nv[k].phi;
    P.values[k] = nv[k].beta1 * nv[k].phi;
    Q.values[k] = nv[k].beta2 * nv[k].psi;
  }
  const GridField Av = diff_v(A), Bu = diff_u(B), Pv = diff_v(P), Qu = diff_u(Q);
  CompatibilityResidual r{GridField(lat), GridField(lat)};
  for (std::size_t k = 0; k < nv.size(); ++k) {
    const NodeValues& n = nv[k];
    const double n1 = n.d.nu1.v, n2 = n.d.nu2.v, la = n.d.lambda.v, mu = n.d.mu.v;
    const double pp = n.phi * n.psi;
    r.gauss.values[k] = normalized_gap(n1 * n2 - la * la - mu * mu, -(Av.values[k] + Bu.values[k]) / pp);
    r.normal.values[k] = normalized_gap(pp * (n1 - n2) * mu, Pv.values[k] - Qu.values[k]);
  }
  return r;
}

BetaGrids recover_beta(const DeterminingData& data, const CauchySolution& sol, const Tolerances& tol) {
  const auto nv = all_node_values(data, sol, tol);
  BetaGrids r{GridField(sol.lattice), GridField(sol.lattice)};
  for (std::size_t k = 0; k < nv.size(); ++k) {
    r.beta1.values[k] = nv[k].beta1;
    r.beta2.values[k] = nv[k].beta2;
  }
  return r;
}

// --- frame integration -----------------------------------------------------------------

namespace {

struct Coef {
  double phi, psi, g1, g2, n1, n2, la, mu, b1, b2;
};

struct State {
  Eigen::Vector4d z;
  Eigen::Matrix4d F;  // rows x, y, b, l
};

State rhs(const Coef& c, const State& s, bool along_u) {
  Eigen::Matrix4d W;
  State d;
  if (along_u) {
    W << 0, c.g1, c.n1, 0,  //
        -c.g1, 0, c.la, c.mu,  //
        -c.n1, -c.la, 0, c.b1,  //
        0, -c.mu, -c.b1, 0;
    W *= c.phi;
    d.z = c.phi * s.F.row(0).transpose();
  } else {
    W << 0, -c.g2, c.la, c.mu,  //
        c.g2, 0, c.n2, 0,  //
        -c.la, -c.n2, 0, c.b2,  //
        -c.mu, 0, -c.b2, 0;
    W *= c.psi;
    d.z = c.psi * s.F.row(1).transpose();
  }
  d.F = W * s.F;
  return d;
}

State axpy(const State& s, double h, const State& k) { return {s.z + h * k.z, s.F + h * k.F}; }

double gram_error(const Eigen::Matrix4d& F) {
  return (F * F.transpose() - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff();
}

class FrameIntegrator {
 public:
  FrameIntegrator(const Lattice& out, const Lattice& work, int factor, std::vector<Coef> coef, const Tolerances& tol)
      : out_(out), work_(work), factor_(factor), coef_(std::move(coef)), tol_(tol) {}

  // One RK4 step between neighbouring output nodes.
  State step(const State& s, int i, int j, int di, int dj) {
    const bool along_u = di != 0;
    const int wi = fine_index(i, out_.nu, factor_), wj = fine_index(j, out_.nv, factor_), half = factor_ / 2;
    const Coef& c0 = at(wi, wj);
    const Coef& cm = at(wi + half * di, wj + half * dj);
    const Coef& c1 = at(wi + factor_ * di, wj + factor_ * dj);
    const double h = along_u ? out_.u(i + di) - out_.u(i) : out_.v(j + dj) - out_.v(j);
    const State k1 = rhs(c0, s, along_u);
    const State k2 = rhs(cm, axpy(s, h / 2, k1), along_u);
    const State k3 = rhs(cm, axpy(s, h / 2, k2), along_u);
    const State k4 = rhs(c1, axpy(s, h, k3), along_u);
    State r{s.z + h / 6 * (k1.z + 2 * k2.z + 2 * k3.z + k4.z), s.F + h / 6 * (k1.F + 2 * k2.F + 2 * k3.F + k4.F)};
    const Point2 where = node(out_, i + di, j + dj);
    if (!r.z.allFinite() || !r.F.allFinite() || r.z.norm() > tol_.blowup)
      throw Error(ErrorKind::BlowUp, "frame integration blew up", where);
    const double drift = gram_error(r.F);
    max_drift = std::max(max_drift, drift);
    if (drift > tol_.tol_drift)
      throw Error(ErrorKind::OrthonormalityDrift, "frame drifted by " + fmt_num(drift) + " in one step", where);
    Eigen::JacobiSVD<Eigen::Matrix4d> svd(r.F, Eigen::ComputeFullU | Eigen::ComputeFullV);
    r.F = svd.matrixU() * svd.matrixV().transpose();
    return r;
  }

  // Row through the base first, then every column (or the transpose order).
  std::vector<State> run(const State& init, int i0, int j0, bool row_first) {
    std::vector<State> g(out_.size());
    g[out_.index(i0, j0)] = init;
    auto line = [&](int i, int j, bool along_u) {
      for (int dir : {1, -1}) {
        int a = i, b = j;
        while (true) {
          const int na = along_u ? a + dir : a, nb = along_u ? b : b + dir;
          if (na < 0 || na >= out_.nu || nb < 0 || nb >= out_.nv) break;
          g[out_.index(na, nb)] = step(g[out_.index(a, b)], a, b, na - a, nb - b);
          a = na;
          b = nb;
        }
      }
    };
    if (row_first) {
      line(i0, j0, true);
      for (int i = 0; i < out_.nu; ++i) line(i, j0, false);
    } else {
      line(i0, j0, false);
      for (int j = 0; j < out_.nv; ++j) line(i0, j, true);
    }
    return g;
  }

  double max_drift = 0;

 private:
  const Coef& at(int wi, int wj) const { return coef_[work_.index(wi, wj)]; }

  Lattice out_, work_;
  int factor_;
  std::vector<Coef> coef_;
  Tolerances tol_;
};

// Even factor k with work == out.refined(k).
int refinement_factor(const Lattice& out, const Lattice& work) {
  int k = 2;
  if (out.nu > 1) k = (work.nu - 1) / (out.nu - 1);
  else if (out.nv > 1) k = (work.nv - 1) / (out.nv - 1);
  const Lattice r = out.refined(k);
  if (k < 2 || k % 2 != 0 || r.nu != work.nu || r.nv != work.nv)
    throw Error(ErrorKind::ShapeMismatch, "Cauchy solution must live on the output lattice refined by an even factor");
  return k;
}

Vec4 to_vec4(const Eigen::Vector4d& v) { return {v[0], v[1], v[2], v[3]}; }

}  // namespace

FrameGrid integrate_frame(const DeterminingData& data, const CauchySolution& sol, const FrameState& initial,
                          const Tolerances& tol) {
  check_data(data);
  const Lattice& out = data.lattice;
  const int factor = refinement_factor(out, sol.lattice);
  const Lattice work = sol.lattice;
  if (gram_error(initial.frame) > 1e-10) throw Error(ErrorKind::Input, "initial frame is not orthonormal");
  const auto [i0, j0] = base_node(out, data.base);

  const auto nv = all_node_values(data, sol, tol);
  std::vector<Coef> coef(nv.size());
  for (std::size_t k = 0; k < nv.size(); ++k) {
    const NodeValues& n = nv[k];
    const double pp = n.phi * n.psi;
    coef[k] = {n.phi,      n.psi,      -n.phi_v / pp, -n.psi_u / pp, n.d.nu1.v, n.d.nu2.v, n.d.lambda.v,
               n.d.mu.v,   n.beta1,    n.beta2};
  }
  FrameIntegrator integ(out, work, factor, coef, tol);
  const State init{initial.z, initial.frame};
  const auto rows = integ.run(init, i0, j0, true);
  const auto cols = integ.run(init, i0, j0, false);

  FrameGrid g;
  g.lattice = out;
  g.phi = g.psi = g.beta1 = g.beta2 = g.commutation = GridField(out);
  for (int j = 0; j < out.nv; ++j)
    for (int i = 0; i < out.nu; ++i) {
      const std::size_t k = out.index(i, j);
      const State& s = rows[k];
      g.z.push_back(to_vec4(s.z));
      g.x.push_back(to_vec4(s.F.row(0).transpose()));
      g.y.push_back(to_vec4(s.F.row(1).transpose()));
      g.b.push_back(to_vec4(s.F.row(2).transpose()));
      g.l.push_back(to_vec4(s.F.row(3).transpose()));
      g.max_gram_error = std::max(g.max_gram_error, gram_error(s.F));
      g.commutation.values[k] = (s.z - cols[k].z).norm();
      const Coef& c = coef[work.index(fine_index(i, out.nu, factor), fine_index(j, out.nv, factor))];
      g.phi.values[k] = c.phi;
      g.psi.values[k] = c.psi;
      g.beta1.values[k] = c.b1;
      g.beta2.values[k] = c.b2;
    }
  g.commutation_max = g.commutation.max_abs();
  g.max_drift = integ.max_drift;
  return g;
}

// --- pipeline ------------------------------------------------------------------------------

namespace {

GridField restrict_to(const GridField& fine, const Lattice& out) {
  const int factor = refinement_factor(out, fine.lattice);
  GridField r(out);
  for (int j = 0; j < out.nv; ++j)
    for (int i = 0; i < out.nu; ++i)
      r.at(i, j) = fine.at(fine_index(i, out.nu, factor), fine_index(j, out.nv, factor));
  return r;
}

// Grow a node rectangle from the base while every new row or column passes.
Domain valid_rectangle(const Lattice& lat, int i0, int j0, const std::function<bool(int, int)>& ok) {
  int lo_i = i0, hi_i = i0, lo_j = j0, hi_j = j0;
  if (!ok(i0, j0)) return {lat.u(i0), lat.u(i0), lat.v(j0), lat.v(j0)};
  auto column_ok = [&](int i) {
    for (int j = lo_j; j <= hi_j; ++j)
      if (!ok(i, j)) return false;
    return true;
  };
  auto row_ok = [&](int j) {
    for (int i = lo_i; i <= hi_i; ++i)
      if (!ok(i, j)) return false;
    return true;
  };
  bool grew = true;
  while (grew) {
    grew = false;
    if (hi_i + 1 < lat.nu && column_ok(hi_i + 1)) ++hi_i, grew = true;
    if (lo_i > 0 && column_ok(lo_i - 1)) --lo_i, grew = true;
    if (hi_j + 1 < lat.nv && row_ok(hi_j + 1)) ++hi_j, grew = true;
    if (lo_j > 0 && row_ok(lo_j - 1)) --lo_j, grew = true;
  }
  return {lat.u(lo_i), lat.u(hi_i), lat.v(lo_j), lat.v(hi_j)};
}

}  // namespace

Reconstruction reconstruct(const DeterminingData& data, const ReconstructOptions& options, const Tolerances& tol) {
  check_data(data);
  const CauchySolution sol = solve_cauchy(data, tol, options.richardson, kWorkRefinement);
  const CompatibilityResidual cw = compatibility_residual(data, sol, tol);
  Reconstruction r;
  r.compat = {restrict_to(cw.gauss, data.lattice), restrict_to(cw.normal, data.lattice)};
  r.compat_max = r.compat.max_abs();
  r.compat_passed = r.compat_max <= tol.tol_compat;
  if (!r.compat_passed && !options.force)
    throw Error(ErrorKind::CompatibilityGate, "compatibility residual " + fmt_num(r.compat_max) +
                                                  " exceeds tol_compat = " + fmt_num(tol.tol_compat));
  r.grid = integrate_frame(data, sol, options.initial, tol);
  const auto [i0, j0] = base_node(data.lattice, data.base);
  r.valid = valid_rectangle(data.lattice, i0, j0, [&](int i, int j) {
    return r.compat.gauss.at(i, j) <= tol.tol_compat && r.compat.normal.at(i, j) <= tol.tol_compat &&
           r.grid.commutation.at(i, j) <= tol.tol_residual;
  });
  return r;
}

// --- rigid alignment ----------------------------------------------------------------------------

double motion_rms(const RigidMotion& m, const std::vector<Vec4>& a, const std::vector<Vec4>& b) {
  if (a.size() != b.size()) throw Error(ErrorKind::ShapeMismatch, "point grids differ in size");
  double s = 0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const Eigen::Vector4d p(a[k][0], a[k][1], a[k][2], a[k][3]), q(b[k][0], b[k][1], b[k][2], b[k][3]);
    if (!p.allFinite() || !q.allFinite()) continue;
    s += (m.Q * p + m.t - q).squaredNorm();
    ++n;
  }
  return n ? std::sqrt(s / n) : 0.0;
}

RigidMotion align_rigid(const std::vector<Vec4>& a, const std::vector<Vec4>& b) {
  if (a.size() != b.size()) throw Error(ErrorKind::ShapeMismatch, "point grids differ in size");
  std::vector<Eigen::Vector4d> P, Q;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const Eigen::Vector4d p(a[k][0], a[k][1], a[k][2], a[k][3]), q(b[k][0], b[k][1], b[k][2], b[k][3]);
    if (p.allFinite() && q.allFinite()) {
      P.push_back(p);
      Q.push_back(q);
    }
  }
  if (P.size() < 5) throw Error(ErrorKind::RankDeficient, "alignment needs at least five points");
  Eigen::Vector4d ca = Eigen::Vector4d::Zero(), cb = Eigen::Vector4d::Zero();
  for (std::size_t k = 0; k < P.size(); ++k) {
    ca += P[k];
    cb += Q[k];
  }
  ca /= P.size();
  cb /= P.size();
  Eigen::Matrix4d H = Eigen::Matrix4d::Zero(), C = Eigen::Matrix4d::Zero();
  for (std::size_t k = 0; k < P.size(); ++k) {
    H += (P[k] - ca) * (Q[k] - cb).transpose();
    C += (P[k] - ca) * (P[k] - ca).transpose();
  }
  const Eigen::Vector4d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d>(C).eigenvalues();
  int rank = 0;
  for (int k = 0; k < 4; ++k) rank += ev[k] > 1e-12 * ev[3] ? 1 : 0;
  if (rank < 2) throw Error(ErrorKind::RankDeficient, "point cloud spans fewer than two dimensions");

  Eigen::JacobiSVD<Eigen::Matrix4d> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix4d U = svd.matrixU(), V = svd.matrixV();
  const double d = (V * U.transpose()).determinant() > 0 ? 1.0 : -1.0;
  RigidMotion best;
  best.rms = INFINITY;
  for (double sign : {d, -d}) {
    Eigen::Matrix4d D = Eigen::Matrix4d::Identity();
    D(3, 3) = sign;
    RigidMotion m;
    m.Q = V * D * U.transpose();
    m.t = cb - m.Q * ca;
    m.rms = motion_rms(m, a, b);
    m.reflection = m.Q.determinant() < 0;
    // prefer the proper motion on ties
    const bool better = m.rms < best.rms - 1e-12 || (std::abs(m.rms - best.rms) <= 1e-12 && !m.reflection);
    if (better) best = m;
  }
  return best;
}

std::vector<Vec4> sample_positions(const Chart& chart, const Lattice& lattice) {
  lattice.validate();
  std::vector<Vec4> out;
  out.reserve(lattice.size());
  for (int j = 0; j < lattice.nv; ++j)
    for (int i = 0; i < lattice.nu; ++i) {
      Vec4 z;
      for (int k = 0; k < 4; ++k) z[k] = evaluate(chart.coords[k], lattice.u(i), lattice.v(j));
      out.push_back(z);
    }
  return out;
}

}  // namespace canon4
