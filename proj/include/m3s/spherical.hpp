#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "m3s/common.hpp"
#include "m3s/quadrature.hpp"
#include "m3s/so3rep.hpp"

namespace m3s {

/// Per-type data shared by all numeric evaluations: the representation and
/// the closed-form coefficients a_1..a_2m in floating point.
struct TypeContext {
  int m = 0;
  Irrep rep;
  std::vector<double> a;  // a[0] = a_1

  double coeff(int j) const { return a[static_cast<size_t>(j - 1)]; }
};

/// Cached, thread-safe; the reference stays valid for the program lifetime.
const TypeContext& type_context(int m);

/// Numeric Q_0(x)..Q_2m(x) via Q_{l+1} = Q_1 Q_l - r^2 a_l/(2l+1) Q_{l-1}.
void eval_q(const TypeContext& ctx, const Vec3& x, std::vector<Mat>& out);

/// Matrix of D_tau on the basis {f_l^s Q_l}, l = 0..2m.
struct TridiagonalOperator {
  int m = 0;
  double s = 1.0;
  std::vector<double> superdiag;  // a_1..a_2m
  std::vector<double> subdiag;    // -s^2/3, -s^2/5, ..., -s^2/(4m+1)

  int size() const { return type_dim(m); }
  Eigen::MatrixXd dense() const;
  /// Spectrum, ascending. Computed from the symmetrised form D^-1 M D, which
  /// exists because every product superdiag[l] * subdiag[l] is positive.
  std::vector<double> eigenvalues() const;
  /// Symmetric tridiagonal T = D^-1 M D and the diagonal of D.
  Eigen::MatrixXd symmetrised(Eigen::VectorXd* scaling = nullptr) const;
};

TridiagonalOperator build_tridiagonal(int m, double s);

enum class Method { Eigenvector = 1, SphereIntegral = 2, DifferentialOperator = 3, Trivial = 0 };

/// Phi_{s,j} = sum_l coeffs[l] f_l^s(|x|) Q_l(x), j in [-m, m].
struct SphericalFunctionSpec {
  int m = 0;
  double s = 1.0;
  int j = 0;
  CVec coeffs;
  Method method = Method::Eigenvector;
};

/// Eigenvector of build_tridiagonal(m, s) at eigenvalue s*j, scaled to u_0 = 1.
SphericalFunctionSpec phi_method1(int m, double s, int j);
/// (2m+1) p(M) e_0 with p the Lagrange polynomial of the node s*j.
SphericalFunctionSpec phi_method3(int m, double s, int j);
/// The constant identity function (the trivial spherical function).
SphericalFunctionSpec trivial_spherical_function(int m);

Mat eval_phi(const SphericalFunctionSpec& spec, const Vec3& x);
/// Analytic partial derivatives d/dx_i Phi(x).
std::array<Mat, 3> eval_phi_gradient(const SphericalFunctionSpec& spec, const Vec3& x);
/// D_tau Phi(x) = sum_i A_i d_i Phi(x) from the analytic gradient.
Mat dtau_phi(const SphericalFunctionSpec& spec, const Vec3& x);
/// (Laplacian x I) Phi(x) by second-order central differences.
Mat laplacian_phi_fd(const SphericalFunctionSpec& spec, const Vec3& x, double h = 1e-4);

/// Spectral projections of dtau(xi) onto the eigenlines i*j*|xi|.
struct ProjectionFamily {
  int m = 0;
  Vec3 direction;
  std::vector<Mat> P;  // P[j + m]

  const Mat& operator()(int j) const { return P[static_cast<size_t>(j + m)]; }
};

ProjectionFamily projections(int m, const Vec3& xi);

/// Projections at every node of a sphere rule, reused across (s, j, x).
class SphereProjector {
 public:
  SphereProjector(int m, SphereRule rule);

  int m() const { return m_; }
  const SphereRule& rule() const { return rule_; }
  /// (2m+1) sum_a w_a exp(-i s <x, xi_a>) P_j(xi_a)
  Mat integrate(double s, int j, const Vec3& x) const;

 private:
  int m_;
  SphereRule rule_;
  std::vector<std::vector<Mat>> proj_;  // [node][j + m]
};

Mat phi_method2(int m, double s, int j, const Vec3& x, const SphereRule& rule);

struct Method2Result {
  Mat value;
  double residual_estimate = 0.0;  // max entry change when the degree is doubled
  int degree = 0;
  bool under_resolved = false;
};

/// Method 2 at the band-limit degree (or `degree` if larger), with a doubling
/// check. `tolerance` sets the under-resolution flag.
Method2Result phi_method2_checked(int m, double s, int j, const Vec3& x, int degree = 0,
                                  double tolerance = 1e-8);

/// Minimum eigenvalue of the Gram matrix <Phi(x_a - x_b) v_b, v_a>.
double check_positive_type(const SphericalFunctionSpec& spec, std::span<const Vec3> points,
                           std::span<const CVec> vectors);

}  // namespace m3s
