#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "m3s/common.hpp"
#include "m3s/radial.hpp"
#include "m3s/spherical.hpp"

namespace m3s {

/// Uniform lattice origin + spacing * (i, j, k), 0 <= i < n[0] etc.
/// Nodes are enumerated with the first index fastest.
struct GridGeometry {
  std::array<int, 3> n{0, 0, 0};
  double spacing = 1.0;
  Vec3 origin = Vec3::Zero();

  size_t nodes() const { return static_cast<size_t>(n[0]) * n[1] * n[2]; }
  size_t index(int i, int j, int k) const {
    return static_cast<size_t>(i) + static_cast<size_t>(n[0]) * (static_cast<size_t>(j) + static_cast<size_t>(n[1]) * k);
  }
  Vec3 point(size_t idx) const;
  /// Symmetric cube of `per_axis` nodes per axis centred at the origin.
  static GridGeometry centred(int per_axis, double spacing);
};

/// End(V)-valued samples on a lattice, node-major, row-major per node.
struct GridField {
  int m = 0;
  GridGeometry geom;
  std::vector<cplx> data;

  int dim() const { return type_dim(m); }
  Mat at(size_t node) const;
  void set(size_t node, const Mat& v);
  static GridField zeros(int m, const GridGeometry& g);
};

/// F(x) = sum_k g_k(|x|) Q_k(x), k = 0..2m.
struct RadialField {
  int m = 0;
  std::vector<RadialProfile> g;
  double support = 10.0;    // g_k are negligible beyond this radius
  double bandwidth = 0.0;   // rough oscillation frequency of the g_k in r
  std::vector<double> r_grid;  // sample radii used when the field is written out

  int dim() const { return type_dim(m); }
  static RadialField zeros(int m);
};

using MatrixField = std::variant<GridField, RadialField>;

int field_m(const MatrixField& f);

Mat eval_field(const RadialField& f, const Vec3& x);
/// g_0(r)..g_2m(r)
std::vector<cplx> radial_values(const RadialField& f, double r);

/// Sample a radial field on a lattice.
GridField sample(const RadialField& f, const GridGeometry& g, Exec exec = Exec::Parallel);

/// Classical transform F^(y) = int F(x) exp(-i <x, y>) dx.
/// Grid fields use the lattice (trapezoid) sum; radial fields use one radial
/// integral per g_k against the f_k kernel.
Mat classical_ft(const MatrixField& f, const Vec3& y);
/// F^(s e_1) only; cheaper than the general case for grids.
Mat classical_ft_axis(const MatrixField& f, double s);
/// Radial fields only: F^(y) by brute-force 3D quadrature (radial
/// Gauss-Legendre x sphere rule). Reference for the fast radial path.
Mat classical_ft_3d(const RadialField& f, const Vec3& y, int radial_nodes = 0, int sphere_degree = 0);

/// h_j(s) = Tr(F^(s e_1) P_j(e_1)), j = -m..m.
std::vector<cplx> h_decompose(const MatrixField& f, double s);

enum class SftMode { Direct, Fast };

/// (1/(2m+1)) int Tr[F(x) Phi_{s,j}(x)^*] dx (direct) or h_{-j}(s) (fast).
cplx spherical_ft(const MatrixField& f, double s, int j, SftMode mode, Exec exec = Exec::Parallel);
/// Direct mode with Phi_{s,j}(x)^* replaced by Phi_{s,-j}(-x)^*.
cplx spherical_ft_parity(const MatrixField& f, double s, int j, Exec exec = Exec::Parallel);

struct TransformOptions {
  double smax = 0.0;      // upper end of the s grid; 0 = estimate from the field
  int nr = 128;           // number of s nodes (rounded up to whole panels)
  int per_panel = 16;
  double truncation_tol = 1e-6;
};

/// Soft problems found during a computation.
struct Diagnostics {
  std::vector<std::string> warnings;
  double truncation_estimate = 0.0;
};

/// s -> F(F)(Phi_{s,j}) sampled at Gauss-Legendre panel nodes on [0, smax].
struct SphericalCoefficients {
  int m = 0;
  double smax = 0.0;
  std::vector<double> s;        // nodes
  std::vector<double> weights;  // quadrature weights for ds
  std::vector<std::vector<cplx>> values;  // values[j + m][node]

  const std::vector<cplx>& operator()(int j) const { return values[static_cast<size_t>(j + m)]; }
  RadialProfile profile(int j) const;
  static SphericalCoefficients zeros(int m, double smax, int nr, int per_panel = 16);
};

/// Characteristic width estimate w, with w^2 = <|x|^2>_{|F|} / 3.
double width_estimate(const MatrixField& f);

SphericalCoefficients forward(const MatrixField& f, const TransformOptions& opt = {},
                              Diagnostics* diag = nullptr, Exec exec = Exec::Parallel);

/// Normalising constant of the inversion formula, 1 / (2 pi^2 (2m+1)).
double inversion_constant(int m);

/// Radial form of the inverse transform:
/// g_k(rho) = C sum_j u_k^(1,j) int F(F)(Phi_{r,j}) f_k(r rho) r^(k+2) dr.
RadialField to_radial(const SphericalCoefficients& c, Diagnostics* diag = nullptr);

/// F(x) = C sum_j int F(F)(Phi_{r,j}) Phi_{r,j}(x) r^2 dr, via to_radial.
Mat inverse(const SphericalCoefficients& c, const Vec3& x);
/// Same formula evaluated literally with one Phi per (node, j); slow reference.
Mat inverse_direct(const SphericalCoefficients& c, const Vec3& x);
std::vector<Mat> inverse_batch(const SphericalCoefficients& c, const std::vector<Vec3>& xs,
                               Exec exec = Exec::Parallel);
/// Inverse evaluated on every node of a lattice.
GridField inverse_on_grid(const SphericalCoefficients& c, const GridGeometry& g,
                          Exec exec = Exec::Parallel);

/// Residual of a failed Schwartz decomposition.
class DecompositionError : public Error {
 public:
  DecompositionError(const std::string& what, double residual) : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

struct Decomposition {
  RadialField field;
  double residual = 0.0;  // max |reconstruction - F| / max |F| over the grid
  Diagnostics diagnostics;
};

/// F = sum_k g_k(|x|) Q_k(x) for an equivariant lattice field. Throws
/// DecompositionError if the reconstruction misses F by more than `tolerance`.
Decomposition schwartz_decompose(const GridField& f, const TransformOptions& opt = {},
                                 double tolerance = 1e-3, Exec exec = Exec::Parallel);

using Multiplier = std::function<cplx(double s, int j)>;
SphericalCoefficients apply_multiplier(const SphericalCoefficients& c, const Multiplier& mu);
Multiplier laplacian_multiplier();
Multiplier dtau_multiplier();
Multiplier identity_multiplier();
/// Piecewise-linear in s, one column per j; rows (s, mu_-m, ..., mu_m).
Multiplier table_multiplier(int m, const std::vector<std::vector<double>>& rows);

/// max_x |[dtau(x/|x|), F(x)]| / max_x |F(x)|: zero for equivariant fields.
double grid_equivariance_defect(const GridField& f);

/// Discrete convolution (lattice sum times spacing^3) of two fields on the
/// same lattice, evaluated on that lattice; contributions from outside it are
/// dropped.
GridField convolve(const GridField& a, const GridField& b, Exec exec = Exec::Parallel);

}  // namespace m3s
