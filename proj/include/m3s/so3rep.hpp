#pragma once

#include <array>
#include <random>
#include <string>

#include <Eigen/Geometry>
#include <nlohmann/json.hpp>

#include "m3s/common.hpp"

namespace m3s {

/// Irreducible representation tau_m of SO(3) on C^(2m+1), given by the images
/// A_i of the so(3) basis Y_i.
///
/// The basis of C^(2m+1) is the weight basis of the e_1 axis: A_1 is diagonal
/// with entries i*j, j = -m..m ascending, so index a corresponds to j = a - m.
/// The generators satisfy [A_1, A_2] = -A_3 (and cyclic), matching the 3x3
/// basis returned by so3_basis().
struct Irrep {
  int m = 0;
  int dim = 1;
  std::array<Mat, 3> generators;
  std::string basis_tag = "weight-e1-ascending";

  const Mat& operator[](int i) const { return generators[static_cast<size_t>(i)]; }
};

Irrep build_irrep(int m);

/// Sum_i x_i A_i.
Mat dtau(const Irrep& rep, const Vec3& x);

/// The 3x3 basis Y_1, Y_2, Y_3 of so(3) in which the representation is
/// expressed (Y_i v = v x e_i). Index is 0-based.
Eigen::Matrix3d so3_basis(int i);

/// Proper rotation, stored as unit axis + angle (right-handed).
class Rotation {
 public:
  Rotation() = default;
  Rotation(const Vec3& axis, double angle);

  static Rotation from_matrix(const Eigen::Matrix3d& r);
  template <class Rng>
  static Rotation random(Rng& rng);

  const Vec3& axis() const { return axis_; }
  double angle() const { return angle_; }

  Eigen::Matrix3d matrix() const;
  Vec3 apply(const Vec3& x) const { return matrix() * x; }
  Rotation inverse() const { return Rotation(axis_, -angle_); }
  Rotation operator*(const Rotation& other) const;

 private:
  Vec3 axis_ = Vec3::UnitX();
  double angle_ = 0.0;
};

template <class Rng>
Rotation Rotation::random(Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  return from_matrix(q.toRotationMatrix());
}

/// Group element tau_m(k), unitary. Computed from the spectral decomposition
/// of dtau(axis), whose eigenvalues are snapped to the exact values i*j.
Mat tau(const Irrep& rep, const Rotation& k);

nlohmann::json irrep_to_json(const Irrep& rep);
Irrep irrep_from_json(const nlohmann::json& j);

}  // namespace m3s
