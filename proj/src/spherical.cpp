#include "m3s/spherical.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "m3s/polyalg.hpp"
#include "m3s/radial.hpp"

namespace m3s {

const TypeContext& type_context(int m) {
  if (m < 0) throw DomainError("type_context: m must be non-negative");
  static std::shared_mutex mutex;
  static std::map<int, std::unique_ptr<TypeContext>> cache;
  {
    std::shared_lock lock(mutex);
    const auto it = cache.find(m);
    if (it != cache.end()) return *it->second;
  }
  auto ctx = std::make_unique<TypeContext>();
  ctx->m = m;
  ctx->rep = build_irrep(m);
  ctx->a = coeff_table(m).as_double();
  std::unique_lock lock(mutex);
  auto [it, inserted] = cache.emplace(m, std::move(ctx));
  return *it->second;
}

void eval_q(const TypeContext& ctx, const Vec3& x, std::vector<Mat>& out) {
  const int d = ctx.rep.dim;
  const int n = 2 * ctx.m + 1;
  out.resize(static_cast<size_t>(n));
  out[0] = Mat::Identity(d, d);
  if (ctx.m == 0) return;
  out[1] = dtau(ctx.rep, x);
  const double r2 = x.squaredNorm();
  for (int l = 1; l + 1 < n; ++l) {
    const auto ul = static_cast<size_t>(l);
    out[ul + 1] = out[1] * out[ul] - (r2 * ctx.coeff(l) / (2.0 * l + 1.0)) * out[ul - 1];
  }
}

Eigen::MatrixXd TridiagonalOperator::dense() const {
  const int n = size();
  Eigen::MatrixXd mtx = Eigen::MatrixXd::Zero(n, n);
  for (int l = 0; l + 1 < n; ++l) {
    mtx(l, l + 1) = superdiag[static_cast<size_t>(l)];
    mtx(l + 1, l) = subdiag[static_cast<size_t>(l)];
  }
  return mtx;
}

Eigen::MatrixXd TridiagonalOperator::symmetrised(Eigen::VectorXd* scaling) const {
  const int n = size();
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd d(n);
  d[0] = 1.0;
  for (int l = 0; l + 1 < n; ++l) {
    const double sup = superdiag[static_cast<size_t>(l)], sub = subdiag[static_cast<size_t>(l)];
    if (!(sup * sub > 0.0))
      throw ConsistencyError("TridiagonalOperator: off-diagonal product is not positive");
    d[l + 1] = d[l] * std::sqrt(sub / sup);
    const double off = (sup < 0.0 ? -1.0 : 1.0) * std::sqrt(sup * sub);
    t(l, l + 1) = off;
    t(l + 1, l) = off;
  }
  if (scaling) *scaling = d;
  return t;
}

std::vector<double> TridiagonalOperator::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrised(), Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

TridiagonalOperator build_tridiagonal(int m, double s) {
  if (!(s > 0.0)) throw DomainError("build_tridiagonal: s must be positive");
  TridiagonalOperator t;
  t.m = m;
  t.s = s;
  t.superdiag = type_context(m).a;
  for (int l = 0; l < 2 * m; ++l) t.subdiag.push_back(-s * s / (2.0 * l + 3.0));
  return t;
}

namespace {

void require_params(int m, double s, int j) {
  if (m < 0) throw DomainError("spherical function: m must be non-negative");
  if (!(s > 0.0)) throw DomainError("spherical function: s must be positive");
  if (j < -m || j > m) throw DomainError("spherical function: j must lie in [-m, m]");
}

}  // namespace

SphericalFunctionSpec phi_method1(int m, double s, int j) {
  require_params(m, s, j);
  SphericalFunctionSpec spec{m, s, j, CVec::Ones(1), Method::Eigenvector};
  if (m == 0) return spec;
  const auto op = build_tridiagonal(m, s);
  Eigen::VectorXd scale;
  const Eigen::MatrixXd t = op.symmetrised(&scale);
  const int n = op.size();
  const double lambda = s * j;
  const Eigen::MatrixXd shifted = t - lambda * Eigen::MatrixXd::Identity(n, n);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(shifted, Eigen::ComputeFullV);
  // For a symmetric matrix the smallest singular value is the distance from
  // lambda to the spectrum.
  const double sigma_min = svd.singularValues()[n - 1];
  if (sigma_min > 1e-8 * s)
    throw ConsistencyError("phi_method1: no eigenvalue within 1e-8 s of s j (distance " +
                           std::to_string(sigma_min) + ")");
  const Eigen::VectorXd w = svd.matrixV().col(n - 1);
  Eigen::VectorXd v = scale.cwiseProduct(w);
  if (std::abs(v[0]) < 1e-300) throw ConsistencyError("phi_method1: eigenvector has u_0 = 0");
  v /= v[0];
  spec.coeffs = v.cast<cplx>();
  return spec;
}

SphericalFunctionSpec phi_method3(int m, double s, int j) {
  require_params(m, s, j);
  SphericalFunctionSpec spec{m, s, j, CVec::Ones(1), Method::DifferentialOperator};
  if (m == 0) return spec;
  // The Lagrange product cancels heavily for larger m * s; carrying it in
  // extended precision keeps it at the accuracy of the eigenvector route.
  using Ld = long double;
  const auto op = build_tridiagonal(m, s);
  const int n = op.size();
  std::vector<Ld> v(static_cast<size_t>(n), 0.0L), w(static_cast<size_t>(n));
  v[0] = 1.0L;
  for (int l = -m; l <= m; ++l) {
    if (l == j) continue;
    const Ld shift = static_cast<Ld>(s) * l, denom = static_cast<Ld>(s) * j - shift;
    for (int r = 0; r < n; ++r) {
      const auto ur = static_cast<size_t>(r);
      Ld acc = -shift * v[ur];
      if (r > 0) acc += static_cast<Ld>(op.subdiag[ur - 1]) * v[ur - 1];
      if (r + 1 < n) acc += static_cast<Ld>(op.superdiag[ur]) * v[ur + 1];
      w[ur] = acc / denom;
    }
    std::swap(v, w);
  }
  spec.coeffs.resize(n);
  for (int r = 0; r < n; ++r) spec.coeffs[r] = static_cast<double>(static_cast<Ld>(n) * v[static_cast<size_t>(r)]);
  return spec;
}

SphericalFunctionSpec trivial_spherical_function(int m) {
  CVec c = CVec::Zero(type_dim(m));
  c[0] = 1.0;
  // s is irrelevant once every coefficient beyond u_0 vanishes, except that
  // f_0^s must be identically 1; evaluation special-cases Method::Trivial.
  return {m, 0.0, 0, c, Method::Trivial};
}

Mat eval_phi(const SphericalFunctionSpec& spec, const Vec3& x) {
  const auto& ctx = type_context(spec.m);
  const int d = ctx.rep.dim;
  if (spec.method == Method::Trivial) return Mat::Identity(d, d);
  const int n = 2 * spec.m + 1;
  double fv[64];
  std::vector<double> fheap;
  std::span<double> fs(fv, static_cast<size_t>(n));
  if (n > 64) {
    fheap.resize(static_cast<size_t>(n));
    fs = fheap;
  }
  f_all(n - 1, spec.s * x.norm(), fs);
  std::vector<Mat> q;
  eval_q(ctx, x, q);
  Mat out = Mat::Zero(d, d);
  for (int l = 0; l < n; ++l) {
    const auto ul = static_cast<size_t>(l);
    out += (spec.coeffs[l] * fs[ul]) * q[ul];
  }
  return out;
}

std::array<Mat, 3> eval_phi_gradient(const SphericalFunctionSpec& spec, const Vec3& x) {
  const auto& ctx = type_context(spec.m);
  const int d = ctx.rep.dim;
  std::array<Mat, 3> grad;
  for (auto& g : grad) g = Mat::Zero(d, d);
  if (spec.method == Method::Trivial) return grad;
  const int n = 2 * spec.m + 1;
  const double s = spec.s;
  const std::vector<double> fv = f_all(n, s * x.norm());  // needs f_{2m+1}
  std::vector<Mat> q;
  eval_q(ctx, x, q);
  const double r2 = x.squaredNorm();
  for (int i = 0; i < 3; ++i) {
    // dQ_l / dx_i by differentiating the three-term recursion.
    std::vector<Mat> dq(static_cast<size_t>(n));
    dq[0] = Mat::Zero(d, d);
    if (n > 1) dq[1] = ctx.rep[i];
    for (int l = 1; l + 1 < n; ++l) {
      const auto ul = static_cast<size_t>(l);
      const double w = ctx.coeff(l) / (2.0 * l + 1.0);
      dq[ul + 1] = ctx.rep[i] * q[ul] + q[1] * dq[ul] - w * (2.0 * x[i] * q[ul - 1] + r2 * dq[ul - 1]);
    }
    for (int l = 0; l < n; ++l) {
      const auto ul = static_cast<size_t>(l);
      // d/dx_i f_l^s(|x|) = -s^2 x_i f_{l+1}^s(|x|) / (2l+3)
      const double dfi = -s * s * x[i] * fv[ul + 1] / (2.0 * l + 3.0);
      grad[static_cast<size_t>(i)] += spec.coeffs[l] * (dfi * q[ul] + fv[ul] * dq[ul]);
    }
  }
  return grad;
}

Mat dtau_phi(const SphericalFunctionSpec& spec, const Vec3& x) {
  const auto& rep = type_context(spec.m).rep;
  const auto g = eval_phi_gradient(spec, x);
  return rep[0] * g[0] + rep[1] * g[1] + rep[2] * g[2];
}

Mat laplacian_phi_fd(const SphericalFunctionSpec& spec, const Vec3& x, double h) {
  const Mat center = eval_phi(spec, x);
  Mat out = -6.0 * center;
  for (int i = 0; i < 3; ++i) {
    Vec3 e = Vec3::Zero();
    e[i] = h;
    out += eval_phi(spec, x + e) + eval_phi(spec, x - e);
  }
  return out / (h * h);
}

ProjectionFamily projections(int m, const Vec3& xi) {
  const double n = xi.norm();
  if (!(n > 0.0)) throw DomainError("projections: direction must be nonzero");
  const auto& rep = type_context(m).rep;
  const Vec3 u = xi / n;
  const Mat x = dtau(rep, u);
  const int d = rep.dim;
  const cplx I(0.0, 1.0);
  ProjectionFamily fam{m, u, {}};
  for (int j = -m; j <= m; ++j) {
    Mat p = Mat::Identity(d, d);
    for (int l = -m; l <= m; ++l) {
      if (l == j) continue;
      p = p * (x - I * static_cast<double>(l) * Mat::Identity(d, d)) / (I * static_cast<double>(j - l));
    }
    fam.P.push_back(std::move(p));
  }
  return fam;
}

SphereProjector::SphereProjector(int m, SphereRule rule) : m_(m), rule_(std::move(rule)) {
  proj_.reserve(rule_.size());
  for (const auto& node : rule_.nodes) proj_.push_back(projections(m, node).P);
}

Mat SphereProjector::integrate(double s, int j, const Vec3& x) const {
  const int d = type_dim(m_);
  Mat acc = Mat::Zero(d, d);
  const auto uj = static_cast<size_t>(j + m_);
  for (size_t a = 0; a < rule_.size(); ++a) {
    const double phase = -s * x.dot(rule_.nodes[a]);
    acc += (rule_.weights[a] * cplx(std::cos(phase), std::sin(phase))) * proj_[a][uj];
  }
  return static_cast<double>(d) * acc;
}

Mat phi_method2(int m, double s, int j, const Vec3& x, const SphereRule& rule) {
  require_params(m, s, j);
  return SphereProjector(m, rule).integrate(s, j, x);
}

Method2Result phi_method2_checked(int m, double s, int j, const Vec3& x, int degree,
                                  double tolerance) {
  require_params(m, s, j);
  Method2Result res;
  res.degree = std::max(degree, band_limit_degree(m, s, x.norm()));
  res.value = phi_method2(m, s, j, x, sphere_rule(res.degree));
  const Mat fine = phi_method2(m, s, j, x, sphere_rule(2 * res.degree));
  res.residual_estimate = max_abs(fine - res.value);
  res.under_resolved = res.residual_estimate > tolerance;
  return res;
}

double check_positive_type(const SphericalFunctionSpec& spec, std::span<const Vec3> points,
                           std::span<const CVec> vectors) {
  if (points.size() != vectors.size()) throw DomainError("check_positive_type: size mismatch");
  const auto n = static_cast<Eigen::Index>(points.size());
  Mat g(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) {
      const auto ua = static_cast<size_t>(a), ub = static_cast<size_t>(b);
      g(a, b) = vectors[ua].dot(eval_phi(spec, points[ua] - points[ub]) * vectors[ub]);
    }
  const Mat h = 0.5 * (g + g.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

}  // namespace m3s
