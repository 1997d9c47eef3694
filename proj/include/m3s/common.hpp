#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace m3s {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using Vec3 = Eigen::Vector3d;

inline constexpr double kPi = 3.14159265358979323846;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation (zero direction,
// s <= 0, j out of range, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Request exceeds what the exact machinery is configured to handle.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

// An internal cross-check failed (e.g. an expected eigenvalue was not found).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

inline int type_dim(int m) { return 2 * m + 1; }

// Largest entrywise modulus.
inline double max_abs(const Mat& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

}  // namespace m3s

namespace m3s {

/// Execution policy for batch kernels. Both policies produce bit-identical
/// results: work is split into fixed chunks whose partial results are
/// combined in a fixed order, independent of the thread count.
enum class Exec { Serial, Parallel };

}  // namespace m3s
