#include <doctest.h>

#include <cmath>

#include "m3s/radial.hpp"

using namespace m3s;

namespace {

// (2j+1)!! j_j(r) / r^j from the standard library's spherical Bessel function.
double f_oracle(int j, double r) {
  return odd_double_factorial(j) * std::sph_bessel(static_cast<unsigned>(j), r) / std::pow(r, j);
}

// Power series of Gamma(j+3/2) J_{j+1/2}(r) / (r/2)^{j+1/2}, summed in long double.
double f_series_oracle(int j, double r) {
  long double term = 1.0L, sum = 1.0L;
  for (int k = 1; k < 80; ++k) {
    term *= -static_cast<long double>(r) * r / (4.0L * k * (k + j + 0.5L));
    sum += term;
  }
  return static_cast<double>(sum);
}

}  // namespace

TEST_SUITE("radial") {

TEST_CASE("closed forms of f_0 and f_1") {
  for (int i = 1; i <= 200; ++i) {
    const double r = 0.25 * i;
    CHECK(std::abs(f(0, r) - std::sin(r) / r) <= 1e-14);
    CHECK(std::abs(f(1, r) - 3.0 * (std::sin(r) - r * std::cos(r)) / (r * r * r)) <= 1e-12);
  }
  for (double r : {0.1, 0.4, 0.7, 1.3, 2.0, 3.5, 5.0, 6.2, 7.0, 8.0}) {
    CHECK(std::abs(f(0, r) - f_series_oracle(0, r)) <= 1e-13);
    CHECK(std::abs(f(1, r) - f_series_oracle(1, r)) <= 1e-13);
  }
}

TEST_CASE("agreement with std::sph_bessel") {
  for (int j = 0; j <= 16; ++j)
    for (double r : {0.3, 0.6, 1.0, 2.5, 7.0, 13.0, 31.0, 50.0}) {
      CAPTURE(j);
      CAPTURE(r);
      // sph_bessel loses relative accuracy deep in the j >> r region
      const double oracle = f_oracle(j, r);
      CHECK(std::abs(f(j, r) - oracle) <= 1e-12 * (1.0 + std::abs(oracle)) + (j > r ? 1e-10 : 0.0));
    }
}

TEST_CASE("value one at the origin and boundedness") {
  for (int j = 0; j <= 16; ++j) {
    CHECK(f(j, 0.0) == 1.0);
    CHECK(f_scaled(j, 3.0, 0.0) == 1.0);
    double mx = 0.0;
    for (int i = 0; i <= 4000; ++i) mx = std::max(mx, std::abs(f(j, 0.025 * i)));
    CHECK(mx <= 1.0 + 1e-12);
  }
}

TEST_CASE("scaling") {
  for (int j = 0; j <= 4; ++j)
    for (double r : {0.2, 1.0, 4.0}) {
      CHECK(f_scaled(j, 1.0, r) == f(j, r));
      CHECK(f_scaled(j, 2.5, r) == f(j, 2.5 * r));
    }
  CHECK(std::abs(f_scaled(0, 2.0, 1.5) - std::sin(3.0) / 3.0) < 1e-15);
  CHECK_THROWS_AS(f_scaled(0, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(f(0, -1.0), DomainError);
}

TEST_CASE("three-term recurrence and differential relation") {
  for (int j = 1; j <= 8; ++j)
    for (int i = 1; i <= 500; ++i) {
      const double r = 0.1 * i;
      const auto v = f_all(j + 1, r);
      const double rec = v[static_cast<size_t>(j)] - v[static_cast<size_t>(j) - 1] -
                         r * r / ((2.0 * j + 1) * (2.0 * j + 3)) * v[static_cast<size_t>(j) + 1];
      CHECK(std::abs(rec) <= 1e-12);
    }
  for (int j = 0; j <= 8; ++j)
    for (int i = 1; i <= 500; ++i) {
      const double r = 0.1 * i;
      const double rel = f_derivative(j, r) / r + f(j + 1, r) / (2.0 * j + 3.0);
      CHECK(std::abs(rel) <= 1e-10);
      const double s = 1.7;
      const double scaled = s * f_derivative(j, s * r) / (s * s * r) + f_scaled(j + 1, s, r) / (2.0 * j + 3.0);
      CHECK(std::abs(scaled) <= 1e-10);
    }
}

TEST_CASE("ODE residual") {
  CHECK(std::abs(check_ode(0, 1.0, 2.0, 1e-4)) <= 1e-6);
  CHECK(std::abs(check_ode(3, 2.0, 0.5, 1e-4)) <= 1e-6);
  CHECK(std::abs(check_ode(2, 1.5, 1e-5, 1e-4)) <= 1e-10);
  CHECK(std::abs(check_ode(2, 1.5, 0.0, 1e-4)) <= 1e-10);
}

TEST_CASE("double factorial") {
  CHECK(odd_double_factorial(0) == 1.0);
  CHECK(odd_double_factorial(3) == 105.0);
  double exact = 1.0;
  for (int k = 3; k <= 2 * 25 + 1; k += 2) exact *= k;
  CHECK(std::abs(odd_double_factorial(25) / exact - 1.0) < 1e-12);
}

TEST_CASE("profiles") {
  const auto k = kernel_profile(1, 2.0);
  CHECK(std::abs(k(0.7) - cplx(f(1, 1.4))) < 1e-15);
  CHECK(zero_profile()(3.0) == cplx(0.0));
  std::vector<double> r;
  std::vector<cplx> v;
  for (int i = 0; i <= 40; ++i) {
    r.push_back(0.1 * i);
    v.emplace_back(std::exp(-r.back() * r.back()), r.back());
  }
  const auto p = sampled_profile(r, v, "sample");
  CHECK(std::abs(p(1.234) - cplx(std::exp(-1.234 * 1.234), 1.234)) < 1e-5);
  CHECK(p(5.0) == cplx(0.0));
}

}
