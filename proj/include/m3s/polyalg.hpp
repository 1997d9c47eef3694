#pragma once

#include <array>
#include <map>
#include <vector>

#include <nlohmann/json.hpp>

#include "m3s/common.hpp"
#include "m3s/exact.hpp"

namespace m3s {

inline constexpr int kExactMaxM = 4;

using Exponent = std::array<int, 3>;

/// Matrix-valued polynomial on R^3 with exact coefficients: a finite map from
/// monomial exponents to dim x dim exact matrices. Zero matrices are never
/// stored.
class MatPoly {
 public:
  using Terms = std::map<Exponent, exact::Matrix>;

  MatPoly() = default;
  explicit MatPoly(int dim) : dim_(dim) {}
  static MatPoly constant(const exact::Matrix& c);
  static MatPoly identity(int dim) { return constant(exact::Matrix::identity(dim)); }
  /// |x|^2 * I
  static MatPoly r_squared(int dim);

  int dim() const { return dim_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;
  bool is_homogeneous(int deg) const;

  void add_term(const Exponent& e, const exact::Matrix& c);

  MatPoly& operator+=(const MatPoly& b);
  MatPoly& operator-=(const MatPoly& b);
  friend MatPoly operator+(MatPoly a, const MatPoly& b) { return a += b; }
  friend MatPoly operator-(MatPoly a, const MatPoly& b) { return a -= b; }
  friend MatPoly operator*(const MatPoly& a, const MatPoly& b);
  friend MatPoly operator*(const MatPoly& a, const exact::Scalar& c);
  friend bool operator==(const MatPoly& a, const MatPoly& b) {
    return a.dim_ == b.dim_ && a.terms_ == b.terms_;
  }

  /// Left multiplication by a constant matrix.
  friend MatPoly operator*(const exact::Matrix& c, const MatPoly& p);
  /// Right multiplication by a constant matrix.
  friend MatPoly operator*(const MatPoly& p, const exact::Matrix& c);

  MatPoly derivative(int axis) const;
  /// Multiply by the monomial x^e.
  MatPoly shifted(const Exponent& e) const;
  /// Exact quotient by |x|^2; throws DomainError if not divisible.
  MatPoly divide_r_squared() const;

  Mat eval(const Vec3& x) const;

 private:
  int dim_ = 0;
  Terms terms_;
};

/// Exact generators A_1, A_2, A_3 mirroring build_irrep (same basis).
struct ExactIrrep {
  int m = 0;
  int dim = 1;
  std::array<exact::Matrix, 3> generators;
};

ExactIrrep exact_generators(int m, int max_m = kExactMaxM);

/// Sum_i d^2 P / dx_i^2
MatPoly laplacian(const MatPoly& p);
/// D_tau P = Sum_i A_i dP/dx_i (left multiplication).
MatPoly apply_dtau_op(const ExactIrrep& rep, const MatPoly& p);

/// Coefficients of D_tau Q_j = a_j Q_{j-1}, j = 1..2m, from the closed form
/// a_1 = c, a_{k+1} = (k+1)^2/(2k+1) (c + (k^2+2k)/4), c = -m(m+1).
struct CoeffTable {
  int m = 0;
  exact::Rational c;
  std::vector<exact::Rational> a;  // a[0] = a_1

  const exact::Rational& operator()(int j) const { return a.at(static_cast<size_t>(j - 1)); }
  std::vector<double> as_double() const;
};

CoeffTable coeff_table(int m);

/// Q_0 = I, Q_1 = sum x_i A_i, Q_{j+1} = Q_1 Q_j - r^2/(2j+1) D_tau Q_j.
std::vector<MatPoly> build_Q(const ExactIrrep& rep);
std::vector<MatPoly> build_Q(int m, int max_m = kExactMaxM);

Mat eval(const MatPoly& p, const Vec3& x);

/// [A_i, Q(x)] - grad Q(x) . (Y_i x): zero for every equivariant polynomial.
MatPoly equivariance_defect(const ExactIrrep& rep, const MatPoly& q, int axis);

/// Q_1 Q_{2m} - r^2/(4m+1) D_tau Q_{2m}; zero for the top generator.
MatPoly top_closure_defect(const ExactIrrep& rep, const std::vector<MatPoly>& q);

/// Q_j expanded in powers of Q_1 with coefficients in C[r^2]:
/// Q_j = sum_i b[i] r^(2i) Q_1^(j-2i), b[0] = 1.
struct Q1Expansion {
  int j = 0;
  std::vector<exact::Rational> b;
};

/// Expansion predicted by the three-term recursion with closed-form a_j.
std::vector<Q1Expansion> q1_expansion_from_recursion(const CoeffTable& table);
/// Expansion recovered from Q_j itself by exact division; throws
/// ConsistencyError if Q_j is not of that form.
Q1Expansion recover_q1_expansion(const std::vector<MatPoly>& q, int j);

nlohmann::json matpoly_to_json(const MatPoly& p);

}  // namespace m3s
