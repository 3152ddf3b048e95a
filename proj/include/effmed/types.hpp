#pragma once

#include <Eigen/Core>

#include <array>
#include <stdexcept>
#include <string>

namespace effmed {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Third-order tensor stored as three matrices: T[k](i, j) = d_k K_ij.
using Tensor3 = std::array<Mat3, 3>;

inline constexpr double kPi = 3.14159265358979323846;

enum class ErrorCode {
  InvalidArgument = 1,
  Domain,
  Singular,
  NotConverged,
  Saturated,
  Io,
  Internal,
};

/// Error raised by every library routine. The code is surfaced unchanged
/// through the C API.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorCode::InvalidArgument, what);
}

inline double frobenius2(const Tensor3& t) {
  return t[0].squaredNorm() + t[1].squaredNorm() + t[2].squaredNorm();
}

}  // namespace effmed
