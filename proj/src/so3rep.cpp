#include "m3s/so3rep.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace m3s {

Irrep build_irrep(int m) {
  if (m < 0) throw DomainError("build_irrep: m must be non-negative");
  const int d = type_dim(m);
  Irrep rep;
  rep.m = m;
  rep.dim = d;
  // Standard spin-m matrices with J_z as the diagonal one; relabel the axes
  // (z, x, y) -> (1, 2, 3) so that the cyclic relation [J_1, J_2] = i J_3
  // holds and A_k = i J_k gives [A_1, A_2] = -A_3.
  Mat jz = Mat::Zero(d, d), jx = Mat::Zero(d, d), jy = Mat::Zero(d, d);
  const cplx I(0.0, 1.0);
  for (int a = 0; a < d; ++a) {
    const double mu = a - m;
    jz(a, a) = mu;
    if (a + 1 < d) {
      // <mu+1| J_+ |mu>
      const double c = std::sqrt(static_cast<double>(m * (m + 1)) - mu * (mu + 1));
      jx(a + 1, a) += 0.5 * c;
      jx(a, a + 1) += 0.5 * c;
      jy(a + 1, a) += -0.5 * I * c;
      jy(a, a + 1) += 0.5 * I * c;
    }
  }
  rep.generators = {I * jz, I * jx, I * jy};
  return rep;
}

Mat dtau(const Irrep& rep, const Vec3& x) {
  return x[0] * rep[0] + x[1] * rep[1] + x[2] * rep[2];
}

Eigen::Matrix3d so3_basis(int i) {
  Eigen::Matrix3d y = Eigen::Matrix3d::Zero();
  switch (i) {
    case 0: y(1, 2) = 1; y(2, 1) = -1; break;
    case 1: y(0, 2) = -1; y(2, 0) = 1; break;
    case 2: y(0, 1) = 1; y(1, 0) = -1; break;
    default: throw DomainError("so3_basis: index must be 0, 1 or 2");
  }
  return y;
}

Rotation::Rotation(const Vec3& axis, double angle) : angle_(angle) {
  const double n = axis.norm();
  if (!(n > 0.0)) {
    if (angle != 0.0) throw DomainError("Rotation: zero axis");
    axis_ = Vec3::UnitX();
    return;
  }
  axis_ = axis / n;
}

Rotation Rotation::from_matrix(const Eigen::Matrix3d& r) {
  const double orth = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (orth > 1e-9 || std::abs(r.determinant() - 1.0) > 1e-9)
    throw DomainError("Rotation::from_matrix: matrix is not in SO(3)");
  Eigen::AngleAxisd aa(r);
  return Rotation(aa.axis(), aa.angle());
}

Eigen::Matrix3d Rotation::matrix() const {
  return Eigen::AngleAxisd(angle_, axis_).toRotationMatrix();
}

Rotation Rotation::operator*(const Rotation& other) const {
  return from_matrix(matrix() * other.matrix());
}

Mat tau(const Irrep& rep, const Rotation& k) {
  // k = exp(angle [n]_x) = exp(-angle sum n_i Y_i), hence
  // tau(k) = exp(-angle dtau(n)) = exp(i angle H) with H = i dtau(n) Hermitian.
  const Mat h = cplx(0.0, 1.0) * dtau(rep, k.axis());
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  const auto& v = es.eigenvectors();
  CVec phase(rep.dim);
  for (int a = 0; a < rep.dim; ++a) {
    const double lam = std::round(es.eigenvalues()[a]);
    phase[a] = std::exp(cplx(0.0, k.angle() * lam));
  }
  return v * phase.asDiagonal() * v.adjoint();
}

nlohmann::json irrep_to_json(const Irrep& rep) {
  nlohmann::json j;
  j["m"] = rep.m;
  j["dim"] = rep.dim;
  j["basis"] = rep.basis_tag;
  auto gens = nlohmann::json::array();
  for (const auto& g : rep.generators) {
    auto flat = nlohmann::json::array();
    for (int a = 0; a < rep.dim; ++a)
      for (int b = 0; b < rep.dim; ++b) flat.push_back({g(a, b).real(), g(a, b).imag()});
    gens.push_back(flat);
  }
  j["generators"] = gens;
  return j;
}

Irrep irrep_from_json(const nlohmann::json& j) {
  Irrep rep;
  rep.m = j.at("m").get<int>();
  rep.dim = type_dim(rep.m);
  rep.basis_tag = j.value("basis", rep.basis_tag);
  const auto& gens = j.at("generators");
  if (gens.size() != 3) throw DomainError("irrep_from_json: expected three generators");
  for (size_t i = 0; i < 3; ++i) {
    const auto& flat = gens[i];
    if (flat.size() != static_cast<size_t>(rep.dim * rep.dim))
      throw DomainError("irrep_from_json: generator size mismatch");
    Mat g(rep.dim, rep.dim);
    for (int a = 0; a < rep.dim; ++a)
      for (int b = 0; b < rep.dim; ++b) {
        const auto& e = flat[static_cast<size_t>(a * rep.dim + b)];
        g(a, b) = cplx(e.at(0).get<double>(), e.at(1).get<double>());
      }
    rep.generators[i] = g;
  }
  return rep;
}

}  // namespace m3s
