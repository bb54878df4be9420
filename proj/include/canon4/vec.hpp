#pragma once

#include <array>
#include <cmath>

namespace canon4 {

template <class S>
using V4 = std::array<S, 4>;
using Vec4 = V4<double>;

template <class S>
V4<S> add(const V4<S>& a, const V4<S>& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]};
}
template <class S>
V4<S> sub(const V4<S>& a, const V4<S>& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]};
}
template <class S, class K>
V4<S> scale(const K& k, const V4<S>& a) {
  return {k * a[0], k * a[1], k * a[2], k * a[3]};
}
template <class S>
S dot(const V4<S>& a, const V4<S>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}
inline double norm(const Vec4& a) { return std::sqrt(dot(a, a)); }

template <class S>
S det3(const S& a11, const S& a12, const S& a13, const S& a21, const S& a22, const S& a23, const S& a31,
       const S& a32, const S& a33) {
  return a11 * (a22 * a33 - a23 * a32) - a12 * (a21 * a33 - a23 * a31) + a13 * (a21 * a32 - a22 * a31);
}

/// Generalized cross product: the vector w with det[a b c w] = |w|^2, orthogonal to a, b, c.
template <class S>
V4<S> cross3(const V4<S>& a, const V4<S>& b, const V4<S>& c) {
  V4<S> w;
  for (int i = 0; i < 4; ++i) {
    int k[3];
    int n = 0;
    for (int j = 0; j < 4; ++j)
      if (j != i) k[n++] = j;
    S minor = det3(a[k[0]], a[k[1]], a[k[2]], b[k[0]], b[k[1]], b[k[2]], c[k[0]], c[k[1]], c[k[2]]);
    w[i] = (i % 2 == 0) ? -minor : minor;
  }
  return w;
}

inline double det4(const Vec4& a, const Vec4& b, const Vec4& c, const Vec4& d) { return dot(cross3(a, b, c), d); }

}  // namespace canon4
