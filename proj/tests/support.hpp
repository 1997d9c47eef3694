#pragma once

#include <random>

#include "m3s/common.hpp"
#include "m3s/so3rep.hpp"

namespace m3s::test {

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

// Uniform point in the ball of the given radius.
template <class Rng>
Vec3 random_point(Rng& g, double radius) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    Vec3 v(u(g), u(g), u(g));
    if (v.squaredNorm() <= 1.0) return radius * v;
  }
}

template <class Rng>
Vec3 random_unit(Rng& g) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v(n(g), n(g), n(g));
  return v / v.norm();
}

template <class Rng>
CVec random_cvec(Rng& g, int d) {
  std::normal_distribution<double> n(0.0, 1.0);
  CVec v(d);
  for (int i = 0; i < d; ++i) v[i] = cplx(n(g), n(g));
  return v;
}

// The 3x3 matrix with x_1, x_2, x_3 placed as in the natural so(3) action:
// [[0, x3, -x2], [-x3, 0, x1], [x2, -x1, 0]].
inline Eigen::Matrix3d natural_dtau(const Vec3& x) {
  Eigen::Matrix3d a;
  a << 0, x[2], -x[1], -x[2], 0, x[0], x[1], -x[0], 0;
  return a;
}

}  // namespace m3s::test
