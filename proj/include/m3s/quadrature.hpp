#pragma once

#include <vector>

#include "m3s/common.hpp"

namespace m3s {

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  size_t size() const { return nodes.size(); }
};

/// n-point Gauss-Legendre rule mapped to [a, b].
GaussRule gauss_legendre(int n, double a = -1.0, double b = 1.0);
/// Composite rule: `panels` equal panels, `per_panel` nodes each.
GaussRule gauss_legendre_panels(int panels, int per_panel, double a, double b);

/// Product rule on the unit sphere for the normalised measure sigma.
/// Gauss-Legendre in cos(theta) times a uniform azimuthal grid; exact for
/// spherical harmonics of degree <= `degree`.
struct SphereRule {
  std::vector<Vec3> nodes;
  std::vector<double> weights;
  int degree = 0;

  size_t size() const { return nodes.size(); }
};

SphereRule sphere_rule(int degree);

/// Degree needed to resolve exp(-i s <x, xi>) P_j(xi) on the sphere.
int band_limit_degree(int m, double s, double radius);

}  // namespace m3s
