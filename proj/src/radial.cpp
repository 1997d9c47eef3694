#include "m3s/radial.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include <boost/math/interpolators/barycentric_rational.hpp>

namespace m3s {

namespace {

struct SeriesValue {
  double f;          // f_j(z)
  double fp_over_z;  // f_j'(z) / z
  double fpp;        // f_j''(z)
};

// f_j(z) = sum_k c_k z^(2k), c_k / c_{k-1} = -1 / (2k (2j + 2k + 1)).
SeriesValue series(int j, double z) {
  const double z2 = z * z;
  double c = 1.0, pw = 1.0;  // c_k and z^(2k-2) for the derivative sums
  SeriesValue v{1.0, 0.0, 0.0};
  for (int k = 1; k < 200; ++k) {
    c *= -1.0 / (2.0 * k * (2.0 * j + 2.0 * k + 1.0));
    const double term_f = c * pw * z2;
    v.f += term_f;
    v.fp_over_z += 2.0 * k * c * pw;
    v.fpp += 2.0 * k * (2.0 * k - 1.0) * c * pw;
    pw *= z2;
    // pw is now z^(2k); the next derivative term is bounded by this
    if (std::abs(c) * pw * (4.0 * k * k + 8.0 * k + 4.0) < 1e-19) break;
  }
  return v;
}

void miller(int jmax, double r, std::span<double> out) {
  const int top = std::max(jmax, static_cast<int>(std::ceil(r))) + 30;
  std::vector<double> g(static_cast<size_t>(top) + 2, 0.0);
  g[static_cast<size_t>(top) + 1] = 1.0;
  g[static_cast<size_t>(top)] = 1.0;
  const double r2 = r * r;
  for (int n = top; n >= 1; --n) {
    const auto un = static_cast<size_t>(n);
    g[un - 1] = g[un] - r2 / ((2.0 * n + 1.0) * (2.0 * n + 3.0)) * g[un + 1];
  }
  const double s = std::sin(r), c = std::cos(r);
  const double f0 = s / r;
  const double f1 = 3.0 * (s - r * c) / (r * r * r);
  // Normalise on whichever of j_0 = f_0, j_1 = r f_1 / 3 is larger.
  const double scale = std::abs(f0) >= std::abs(r * f1 / 3.0) ? f0 / g[0] : f1 / g[1];
  for (int n = 0; n <= jmax; ++n) out[static_cast<size_t>(n)] = scale * g[static_cast<size_t>(n)];
}

}  // namespace

void f_all(int jmax, double r, std::span<double> out) {
  if (jmax < 0) return;
  if (!(r >= 0.0)) throw DomainError("f: r must be non-negative");
  if (r < kSeriesThreshold) {
    for (int j = 0; j <= jmax; ++j) out[static_cast<size_t>(j)] = series(j, r).f;
    return;
  }
  miller(jmax, r, out);
}

std::vector<double> f_all(int jmax, double r) {
  std::vector<double> out(static_cast<size_t>(std::max(jmax, 0)) + 1);
  f_all(jmax, r, out);
  return out;
}

double f(int j, double r) {
  if (j < 0) throw DomainError("f: j must be non-negative");
  if (!(r >= 0.0)) throw DomainError("f: r must be non-negative");
  if (r < kSeriesThreshold) return series(j, r).f;
  std::vector<double> buf(static_cast<size_t>(j) + 1);
  miller(j, r, buf);
  return buf.back();
}

double f_scaled(int j, double s, double r) {
  if (!(s > 0.0)) throw DomainError("f_scaled: s must be positive");
  return f(j, s * r);
}

double f_derivative(int j, double r) {
  if (r < kSeriesThreshold) return series(j, r).fp_over_z * r;
  if (j == 0) return (r * std::cos(r) - std::sin(r)) / (r * r);
  // j_j' = j_{j-1} - (j+1)/r j_j  =>  f_j' = (2j+1) (f_{j-1} - f_j) / r
  std::vector<double> buf(static_cast<size_t>(j) + 1);
  miller(j, r, buf);
  return (2.0 * j + 1.0) * (buf[static_cast<size_t>(j) - 1] - buf[static_cast<size_t>(j)]) / r;
}

double f_second_derivative_series(int j, double r) { return series(j, r).fpp; }

double check_ode(int j, double s, double r, double h) {
  if (!(s > 0.0)) throw DomainError("check_ode: s must be positive");
  if (r <= 2.0 * h) {
    const double z = s * r;
    const auto v = series(j, z);
    return s * s * (v.fpp + (2.0 + 2.0 * j) * v.fp_over_z + v.f);
  }
  const double gp = f(j, s * (r + h)), g0 = f(j, s * r), gm = f(j, s * (r - h));
  const double d2 = (gp - 2.0 * g0 + gm) / (h * h);
  const double d1 = (gp - gm) / (2.0 * h);
  return d2 + (2.0 + 2.0 * j) / r * d1 + s * s * g0;
}

double odd_double_factorial(int j) {
  if (j <= 20) {
    double v = 1.0;
    for (int k = 3; k <= 2 * j + 1; k += 2) v *= k;
    return v;
  }
  return std::exp(std::lgamma(2.0 * j + 2.0) - j * std::log(2.0) - std::lgamma(j + 1.0));
}

RadialProfile kernel_profile(int j, double s) {
  return {[j, s](double r) { return cplx(f_scaled(j, s, r)); },
          "f_" + std::to_string(j) + "^" + std::to_string(s)};
}

RadialProfile zero_profile() {
  return {[](double) { return cplx(0.0); }, "zero"};
}

RadialProfile sampled_profile(std::vector<double> r, std::vector<cplx> v, std::string label) {
  if (r.size() != v.size() || r.empty()) throw DomainError("sampled_profile: size mismatch");
  if (r.size() < 4) {
    // Too few points for a rational interpolant: piecewise linear.
    return {[r, v](double x) {
              if (x > r.back()) return cplx(0.0);
              if (x <= r.front()) return v.front();
              const auto it = std::upper_bound(r.begin(), r.end(), x);
              const size_t i = static_cast<size_t>(it - r.begin());
              const double t = (x - r[i - 1]) / (r[i] - r[i - 1]);
              return (1.0 - t) * v[i - 1] + t * v[i];
            },
            std::move(label)};
  }
  std::vector<double> re, im;
  for (const auto& c : v) {
    re.push_back(c.real());
    im.push_back(c.imag());
  }
  using Interp = boost::math::barycentric_rational<double>;
  auto ir = std::make_shared<Interp>(r.data(), re.data(), r.size(), 3);
  auto ii = std::make_shared<Interp>(r.data(), im.data(), r.size(), 3);
  const double rmax = r.back();
  return {[ir, ii, rmax](double x) {
            if (x > rmax) return cplx(0.0);
            return cplx((*ir)(x), (*ii)(x));
          },
          std::move(label)};
}

}  // namespace m3s
