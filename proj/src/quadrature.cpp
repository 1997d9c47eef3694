#include "m3s/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/legendre.hpp>

namespace m3s {

GaussRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw DomainError("gauss_legendre: need at least one node");
  // legendre_p_zeros returns the non-negative zeros in increasing order.
  const auto zeros = boost::math::legendre_p_zeros<double>(n);
  std::vector<double> x, w;
  for (double z : zeros) {
    const double dp = boost::math::legendre_p_prime(n, z);
    const double wt = 2.0 / ((1.0 - z * z) * dp * dp);
    x.push_back(z);
    w.push_back(wt);
    if (z != 0.0) {
      x.push_back(-z);
      w.push_back(wt);
    }
  }
  std::vector<size_t> idx(x.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](size_t i, size_t j) { return x[i] < x[j]; });
  GaussRule r;
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  for (size_t i : idx) {
    r.nodes.push_back(mid + half * x[i]);
    r.weights.push_back(half * w[i]);
  }
  return r;
}

GaussRule gauss_legendre_panels(int panels, int per_panel, double a, double b) {
  if (panels < 1) throw DomainError("gauss_legendre_panels: need at least one panel");
  GaussRule out;
  const double h = (b - a) / panels;
  const GaussRule ref = gauss_legendre(per_panel);
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    for (size_t i = 0; i < ref.size(); ++i) {
      out.nodes.push_back(lo + 0.5 * h * (ref.nodes[i] + 1.0));
      out.weights.push_back(0.5 * h * ref.weights[i]);
    }
  }
  return out;
}

SphereRule sphere_rule(int degree) {
  if (degree < 0) throw DomainError("sphere_rule: degree must be non-negative");
  const int nt = (degree + 2) / 2;  // ceil((degree + 1) / 2)
  const int np = 2 * nt;
  const GaussRule gl = gauss_legendre(nt);
  SphereRule rule;
  rule.degree = degree;
  for (int t = 0; t < nt; ++t) {
    const double ct = gl.nodes[static_cast<size_t>(t)];
    const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    const double w = 0.5 * gl.weights[static_cast<size_t>(t)] / np;
    for (int p = 0; p < np; ++p) {
      const double phi = 2.0 * kPi * p / np;
      rule.nodes.emplace_back(ct, st * std::cos(phi), st * std::sin(phi));
      rule.weights.push_back(w);
    }
  }
  return rule;
}

int band_limit_degree(int m, double s, double radius) {
  return 2 * m + static_cast<int>(std::ceil(std::exp(1.0) * s * radius)) + 10;
}

}  // namespace m3s
