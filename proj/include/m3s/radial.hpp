#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "m3s/common.hpp"

namespace m3s {

/// Radial kernels f_j(r) = Gamma(j+3/2) J_{j+1/2}(r) / (r/2)^{j+1/2}
///                       = (2j+1)!! j_j(r) / r^j,
/// normalised so that f_j(0) = 1 and |f_j| <= 1.
///
/// For r below kSeriesThreshold the Taylor series is summed directly; above it
/// the whole family f_0..f_N is produced by a downward three-term recurrence
/// normalised against the closed forms of f_0 and f_1.
inline constexpr double kSeriesThreshold = 0.5;

double f(int j, double r);
double f_scaled(int j, double s, double r);

/// Fills out[0..jmax] with f_0(r)..f_jmax(r).
void f_all(int jmax, double r, std::span<double> out);
std::vector<double> f_all(int jmax, double r);

/// d/dr f_j(r), from the spherical Bessel derivative identity (large r) or
/// the differentiated series (small r). Independent of the relation
/// f_j'(r) = -r f_{j+1}(r) / (2j+3).
double f_derivative(int j, double r);
/// d^2/dr^2 f_j(r) via the differentiated series; only valid for small r.
double f_second_derivative_series(int j, double r);

/// Central-difference residual of f'' + (2+2j)/r f' + s^2 f for f = f_j^s.
/// Near r = 0 (r <= 2h) the residual is computed from the series instead.
double check_ode(int j, double s, double r, double h);

/// (2j+1)!!
double odd_double_factorial(int j);

/// Scalar function of r >= 0 with a descriptive label.
struct RadialProfile {
  std::function<cplx(double)> eval;
  std::string label;

  cplx operator()(double r) const { return eval ? eval(r) : cplx(0.0); }
};

RadialProfile kernel_profile(int j, double s);
RadialProfile zero_profile();
/// Barycentric rational interpolant through (r_k, v_k); zero outside the
/// sampled range on the right.
RadialProfile sampled_profile(std::vector<double> r, std::vector<cplx> v, std::string label);

}  // namespace m3s
