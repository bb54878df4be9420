#include "canon4/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "canon4/error.hpp"

namespace canon4 {

bool Domain::contains(double u, double v, double slack) const {
  const double su = slack * std::max(1.0, std::abs(u_max - u_min));
  const double sv = slack * std::max(1.0, std::abs(v_max - v_min));
  return u >= u_min - su && u <= u_max + su && v >= v_min - sv && v <= v_max + sv;
}

void Lattice::validate() const {
  if (nu < 1 || nv < 1) throw Error(ErrorKind::Input, "lattice needs at least one node per axis");
  if (!(bounds.u_max >= bounds.u_min) || !(bounds.v_max >= bounds.v_min))
    throw Error(ErrorKind::Input, "lattice bounds must satisfy min <= max");
  if ((nu > 1 && bounds.u_max == bounds.u_min) || (nv > 1 && bounds.v_max == bounds.v_min))
    throw Error(ErrorKind::Input, "lattice with several nodes needs a nonempty interval");
}

Lattice Lattice::refined(int factor) const {
  Lattice r = *this;
  if (nu > 1) r.nu = (nu - 1) * factor + 1;
  if (nv > 1) r.nv = (nv - 1) * factor + 1;
  return r;
}

namespace {
int node_of(double x, double lo, double h, int n) {
  if (n == 1) return std::abs(x - lo) <= 1e-12 * std::max(1.0, std::abs(lo)) ? 0 : -1;
  const double t = (x - lo) / h;
  const double r = std::round(t);
  if (std::abs(t - r) > 1e-9 || r < 0 || r > n - 1) return -1;
  return static_cast<int>(r);
}
}  // namespace

int Lattice::node_u(double x) const { return node_of(x, bounds.u_min, hu(), nu); }
int Lattice::node_v(double x) const { return node_of(x, bounds.v_min, hv(), nv); }

double GridField::max_abs() const {
  double m = 0.0;
  for (double x : values)
    if (!std::isnan(x)) m = std::max(m, std::abs(x));
  return m;
}

double GridField::mean_abs() const {
  double s = 0.0;
  std::size_t n = 0;
  for (double x : values) {
    if (std::isnan(x)) continue;
    s += std::abs(x);
    ++n;
  }
  return n ? s / static_cast<double>(n) : 0.0;
}

std::vector<double> derivative_1d(const std::vector<double>& f, double h) {
  const std::size_t n = f.size();
  std::vector<double> d(n, 0.0);
  if (n < 2) return d;
  if (n == 2) {
    d[0] = d[1] = (f[1] - f[0]) / h;
    return d;
  }
  if (n < 5) {
    d[0] = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h);
    d[n - 1] = (3 * f[n - 1] - 4 * f[n - 2] + f[n - 3]) / (2 * h);
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2 * h);
    return d;
  }
  const double c = 1.0 / (12 * h);
  d[0] = c * (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]);
  d[1] = c * (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]);
  for (std::size_t i = 2; i + 2 < n; ++i) d[i] = c * (f[i - 2] - 8 * f[i - 1] + 8 * f[i + 1] - f[i + 2]);
  d[n - 2] = -c * (-3 * f[n - 1] - 10 * f[n - 2] + 18 * f[n - 3] - 6 * f[n - 4] + f[n - 5]);
  d[n - 1] = -c * (-25 * f[n - 1] + 48 * f[n - 2] - 36 * f[n - 3] + 16 * f[n - 4] - 3 * f[n - 5]);
  return d;
}

GridField diff_u(const GridField& f) {
  const Lattice& L = f.lattice;
  GridField out(L);
  std::vector<double> line(L.nu);
  for (int j = 0; j < L.nv; ++j) {
    for (int i = 0; i < L.nu; ++i) line[i] = f.at(i, j);
    auto d = derivative_1d(line, L.hu());
    for (int i = 0; i < L.nu; ++i) out.at(i, j) = d[i];
  }
  return out;
}

GridField diff_v(const GridField& f) {
  const Lattice& L = f.lattice;
  GridField out(L);
  std::vector<double> line(L.nv);
  for (int i = 0; i < L.nu; ++i) {
    for (int j = 0; j < L.nv; ++j) line[j] = f.at(i, j);
    auto d = derivative_1d(line, L.hv());
    for (int j = 0; j < L.nv; ++j) out.at(i, j) = d[j];
  }
  return out;
}

std::vector<double> cumulative_integral(const std::vector<double>& f, double h, int base) {
  const int n = static_cast<int>(f.size());
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  // panel[i] = integral over [x_i, x_{i+1}]
  std::vector<double> panel(n - 1);
  for (int i = 0; i + 1 < n; ++i) {
    if (n < 4) {
      panel[i] = 0.5 * h * (f[i] + f[i + 1]);
    } else if (i == 0) {
      panel[i] = h / 24 * (9 * f[0] + 19 * f[1] - 5 * f[2] + f[3]);
    } else if (i == n - 2) {
      panel[i] = h / 24 * (f[n - 4] - 5 * f[n - 3] + 19 * f[n - 2] + 9 * f[n - 1]);
    } else {
      panel[i] = h / 24 * (-f[i - 1] + 13 * f[i] + 13 * f[i + 1] - f[i + 2]);
    }
  }
  for (int i = base + 1; i < n; ++i) out[i] = out[i - 1] + panel[i - 1];
  for (int i = base - 1; i >= 0; --i) out[i] = out[i + 1] - panel[i];
  return out;
}

namespace {
double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int k = 0; k < panels; ++k) s += 4 * f(a + (k + 0.5) * h);
  for (int k = 1; k < panels; ++k) s += 2 * f(a + k * h);
  return s * h / 6;
}
}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, int panels) {
  if (a == b) return 0.0;
  const double coarse = simpson(f, a, b, panels);
  const double fine = simpson(f, a, b, 2 * panels);
  return (16 * fine - coarse) / 15;
}

std::vector<double> cumulative_from(const std::function<double(double)>& f, double x0, const std::vector<double>& xs,
                                    int panels) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> out(xs.size(), 0.0);
  // upward from x0
  double x = x0, acc = 0.0;
  for (std::size_t k : order) {
    if (xs[k] < x0) continue;
    acc += integrate(f, x, xs[k], panels);
    x = xs[k];
    out[k] = acc;
  }
  x = x0;
  acc = 0.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const std::size_t k = *it;
    if (xs[k] >= x0) continue;
    acc += integrate(f, x, xs[k], panels);
    x = xs[k];
    out[k] = acc;
  }
  return out;
}

double hermite(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& dy, double t) {
  const std::size_t n = x.size();
  if (n == 1) return y[0];
  std::size_t k = std::upper_bound(x.begin(), x.end(), t) - x.begin();
  k = std::clamp<std::size_t>(k, 1, n - 1) - 1;
  const double h = x[k + 1] - x[k];
  const double s = (t - x[k]) / h;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  return h00 * y[k] + h10 * h * dy[k] + h01 * y[k + 1] + h11 * h * dy[k + 1];
}

}  // namespace canon4
