#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "m3s/common.hpp"

namespace m3s::exact {

using Rational = mpq_class;

/// re + i*im with arbitrary-precision rational parts.
struct GaussianRational {
  Rational re, im;

  GaussianRational() = default;
  GaussianRational(Rational r, Rational i = 0) : re(std::move(r)), im(std::move(i)) {
    re.canonicalize();
    im.canonicalize();
  }

  bool is_zero() const { return sgn(re) == 0 && sgn(im) == 0; }
  GaussianRational conj() const { return {re, -im}; }
  GaussianRational inverse() const;
  cplx to_complex() const { return {re.get_d(), im.get_d()}; }

  friend GaussianRational operator+(const GaussianRational& a, const GaussianRational& b) {
    return {a.re + b.re, a.im + b.im};
  }
  friend GaussianRational operator-(const GaussianRational& a, const GaussianRational& b) {
    return {a.re - b.re, a.im - b.im};
  }
  friend GaussianRational operator-(const GaussianRational& a) { return {-a.re, -a.im}; }
  friend GaussianRational operator*(const GaussianRational& a, const GaussianRational& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend bool operator==(const GaussianRational& a, const GaussianRational& b) {
    return a.re == b.re && a.im == b.im;
  }
};

/// Squarefree part of n together with the extracted square: n = k^2 * d.
std::pair<std::uint64_t, std::uint64_t> squarefree_split(std::uint64_t n);

/// Element of Q(i)(sqrt 2, sqrt 3, ...): a finite sum of q_d * sqrt(d) over
/// distinct squarefree radicands d, with q_d nonzero Gaussian rationals.
/// The representation is canonical, so equality and zero tests are exact.
class Scalar {
 public:
  struct Term {
    std::uint64_t radicand;
    GaussianRational coeff;
  };

  Scalar() = default;
  Scalar(long v) : Scalar(GaussianRational(Rational(v))) {}  // NOLINT
  Scalar(const GaussianRational& q, std::uint64_t radicand = 1);
  static Scalar rational(const Rational& q) { return Scalar(GaussianRational(q)); }
  /// q * sqrt(n) for any positive integer n.
  static Scalar sqrt_times(const GaussianRational& q, std::uint64_t n);

  bool is_zero() const { return terms_.empty(); }
  const std::vector<Term>& terms() const { return terms_; }
  /// Non-null when the value lies in Q(i).
  const GaussianRational* as_gaussian() const;
  cplx to_complex() const;
  std::string to_string() const;

  Scalar& operator+=(const Scalar& b);
  Scalar& operator-=(const Scalar& b);
  friend Scalar operator+(Scalar a, const Scalar& b) { return a += b; }
  friend Scalar operator-(Scalar a, const Scalar& b) { return a -= b; }
  friend Scalar operator-(const Scalar& a);
  friend Scalar operator*(const Scalar& a, const Scalar& b);
  friend Scalar operator*(const Scalar& a, const GaussianRational& q);
  friend bool operator==(const Scalar& a, const Scalar& b);

  /// Multiplicative inverse of a single-term value; throws otherwise.
  Scalar inverse_monomial() const;

 private:
  void add_term(std::uint64_t radicand, const GaussianRational& c);
  std::vector<Term> terms_;  // sorted by radicand
};

/// Dense square matrix over Scalar.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(int dim) : dim_(dim), data_(static_cast<size_t>(dim * dim)) {}
  static Matrix identity(int dim);

  int dim() const { return dim_; }
  Scalar& operator()(int a, int b) { return data_[static_cast<size_t>(a * dim_ + b)]; }
  const Scalar& operator()(int a, int b) const { return data_[static_cast<size_t>(a * dim_ + b)]; }
  bool is_zero() const;
  Mat to_complex() const;

  Matrix& operator+=(const Matrix& b);
  Matrix& operator-=(const Matrix& b);
  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(const Matrix& a, const Matrix& b);
  friend Matrix operator*(const Matrix& a, const Scalar& c);
  friend bool operator==(const Matrix& a, const Matrix& b);

 private:
  int dim_ = 0;
  std::vector<Scalar> data_;
};

}  // namespace m3s::exact
