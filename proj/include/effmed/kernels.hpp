#pragma once

// Free-space Green kernels of -Laplace and of the Stokes operator, their
// derivatives, and the truncated single-sphere profiles used by correctors.

#include "effmed/types.hpp"

#include <cmath>
#include <string>
#include <string_view>
#include <variant>

namespace effmed {

enum class KernelId {
  Laplace,              // G(x) = 1/(4 pi |x|)
  LaplaceGrad,          // grad G
  Dipole,               // V = grad G (same values, separate name)
  DipoleGrad,           // grad V = Hessian of G
  Stokeslet,            // G_St
  StokesletGrad,        // grad G_St
  StokesDegenerate,     // R_St
  StokesDegenerateGrad, // grad R_St
  LaplaceTruncated,     // capped G
  StokesTruncated,      // G_St + R_St outside, I/(6 pi) inside
  DipoleTruncated,      // V outside, -x/(4 pi) inside
  Dyad,                 // x (x) x / |x|^3
};

using KernelValue = std::variant<double, Vec3, Mat3, Tensor3>;

std::string_view kernel_name(KernelId id);
KernelId kernel_from_name(std::string_view name);
bool kernel_is_singular(KernelId id);

/// Closed-form evaluation. Singular kernels throw ErrorCode::Domain at x = 0.
KernelValue eval(KernelId id, const Vec3& x);

/// Max-abs difference between two kernel values of the same arity.
double max_abs_diff(const KernelValue& a, const KernelValue& b);

namespace kern {

inline double laplace(const Vec3& x) { return 1.0 / (4.0 * kPi * x.norm()); }

inline Vec3 laplace_grad(const Vec3& x) {
  const double r = x.norm();
  return -x / (4.0 * kPi * r * r * r);
}

inline Mat3 laplace_hess(const Vec3& x) {
  const double r2 = x.squaredNorm();
  const double r = std::sqrt(r2);
  const double ir3 = 1.0 / (r2 * r);
  const double ir5 = ir3 / r2;
  return (3.0 * ir5 * (x * x.transpose()) - ir3 * Mat3::Identity()) / (4.0 * kPi);
}

/// sum_k d_k (d/dx_k)(d/dx_i)(d/dx_j) G
inline Mat3 laplace_hess_dir(const Vec3& x, const Vec3& d) {
  const double r2 = x.squaredNorm();
  const double r = std::sqrt(r2);
  const double ir5 = 1.0 / (r2 * r2 * r);
  const double ir7 = ir5 / r2;
  const double xd = x.dot(d);
  Mat3 m = 3.0 * ir5 * (d * x.transpose() + x * d.transpose() + xd * Mat3::Identity()) -
           15.0 * ir7 * xd * (x * x.transpose());
  return m / (4.0 * kPi);
}

inline Tensor3 laplace_third(const Vec3& x) {
  Tensor3 t;
  for (int k = 0; k < 3; ++k) t[k] = laplace_hess_dir(x, Vec3::Unit(k));
  return t;
}

inline Mat3 stokeslet(const Vec3& x) {
  const double r2 = x.squaredNorm();
  const double r = std::sqrt(r2);
  return (Mat3::Identity() / r + (x * x.transpose()) / (r2 * r)) / (8.0 * kPi);
}

inline Mat3 stokeslet_dir(const Vec3& x, const Vec3& d) {
  const double r2 = x.squaredNorm();
  const double r = std::sqrt(r2);
  const double ir3 = 1.0 / (r2 * r);
  const double ir5 = ir3 / r2;
  const double xd = x.dot(d);
  Mat3 m = -xd * ir3 * Mat3::Identity() + ir3 * (d * x.transpose() + x * d.transpose()) -
           3.0 * ir5 * xd * (x * x.transpose());
  return m / (8.0 * kPi);
}

inline Tensor3 stokeslet_grad(const Vec3& x) {
  Tensor3 t;
  for (int k = 0; k < 3; ++k) t[k] = stokeslet_dir(x, Vec3::Unit(k));
  return t;
}

inline Mat3 degenerate(const Vec3& x) {
  const double r2 = x.squaredNorm();
  const double r = std::sqrt(r2);
  const double ir3 = 1.0 / (r2 * r);
  return (ir3 / 3.0 * Mat3::Identity() - ir3 / r2 * (x * x.transpose())) / (8.0 * kPi);
}

inline Mat3 degenerate_dir(const Vec3& x, const Vec3& d) {
  const double r2 = x.squaredNorm();
  const double r = std::sqrt(r2);
  const double ir5 = 1.0 / (r2 * r2 * r);
  const double ir7 = ir5 / r2;
  const double xd = x.dot(d);
  Mat3 m = -xd * ir5 * Mat3::Identity() - ir5 * (d * x.transpose() + x * d.transpose()) +
           5.0 * ir7 * xd * (x * x.transpose());
  return m / (8.0 * kPi);
}

inline Tensor3 degenerate_grad(const Vec3& x) {
  Tensor3 t;
  for (int k = 0; k < 3; ++k) t[k] = degenerate_dir(x, Vec3::Unit(k));
  return t;
}

inline Mat3 dyad(const Vec3& x) {
  const double r2 = x.squaredNorm();
  return (x * x.transpose()) / (r2 * std::sqrt(r2));
}

inline Mat3 dyad_dir(const Vec3& x, const Vec3& d) {
  const double r2 = x.squaredNorm();
  const double r = std::sqrt(r2);
  // x(x)x/|x|^3 = 8 pi G_St - 4 pi G I
  return 8.0 * kPi * stokeslet_dir(x, d) + (x.dot(d) / (r2 * r)) * Mat3::Identity();
}

inline double laplace_truncated(const Vec3& x) {
  const double r = x.norm();
  return r >= 1.0 ? 1.0 / (4.0 * kPi * r) : 1.0 / (4.0 * kPi);
}

inline Mat3 stokes_truncated(const Vec3& x) {
  if (x.norm() >= 1.0) return stokeslet(x) + degenerate(x);
  return Mat3::Identity() / (6.0 * kPi);
}

inline Vec3 dipole_truncated(const Vec3& x) {
  if (x.norm() >= 1.0) return laplace_grad(x);
  return -x / (4.0 * kPi);
}

}  // namespace kern

// Kernel functors consumed by kernel_sum. `dir(x, d)` returns the derivative
// of the kernel at x along d and is what the octree far field needs.

struct LaplaceK {
  using value_type = double;
  static constexpr bool singular = true;
  double operator()(const Vec3& x) const { return kern::laplace(x); }
  double dir(const Vec3& x, const Vec3& d) const { return kern::laplace_grad(x).dot(d); }
  /// sum_ab q_ab d_a d_b G
  double quad(const Vec3& x, const Mat3& q) const { return q.cwiseProduct(kern::laplace_hess(x)).sum(); }
  /// w G(x) - d . grad G(x) + q : grad grad G(x) / 2
  double far(const Vec3& x, double w, const Vec3& d, const Mat3& q) const {
    const double r2 = x.squaredNorm();
    const double ir = 1.0 / std::sqrt(r2);
    const double ir3 = ir / r2;
    const double ir5 = ir3 / r2;
    return (w * ir + d.dot(x) * ir3 + 0.5 * (3.0 * ir5 * x.dot(q * x) - ir3 * q.trace())) / (4.0 * kPi);
  }
};

struct LaplaceGradK {
  using value_type = Vec3;
  static constexpr bool singular = true;
  Vec3 operator()(const Vec3& x) const { return kern::laplace_grad(x); }
  Vec3 dir(const Vec3& x, const Vec3& d) const { return kern::laplace_hess(x) * d; }
  Vec3 quad(const Vec3& x, const Mat3& q) const {
    Vec3 v = Vec3::Zero();
    for (int a = 0; a < 3; ++a) v += kern::laplace_hess_dir(x, q.col(a)).row(a).transpose();
    return v;
  }
};

struct LaplaceHessK {
  using value_type = Mat3;
  static constexpr bool singular = true;
  Mat3 operator()(const Vec3& x) const { return kern::laplace_hess(x); }
  Mat3 dir(const Vec3& x, const Vec3& d) const { return kern::laplace_hess_dir(x, d); }
};

struct StokesletK {
  using value_type = Mat3;
  static constexpr bool singular = true;
  Mat3 operator()(const Vec3& x) const { return kern::stokeslet(x); }
  Mat3 dir(const Vec3& x, const Vec3& d) const { return kern::stokeslet_dir(x, d); }
};

struct DegenerateK {
  using value_type = Mat3;
  static constexpr bool singular = true;
  Mat3 operator()(const Vec3& x) const { return kern::degenerate(x); }
  Mat3 dir(const Vec3& x, const Vec3& d) const { return kern::degenerate_dir(x, d); }
};

struct DyadK {
  using value_type = Mat3;
  static constexpr bool singular = true;
  Mat3 operator()(const Vec3& x) const { return kern::dyad(x); }
  Mat3 dir(const Vec3& x, const Vec3& d) const { return kern::dyad_dir(x, d); }
};

// Direct-only kernels (no far-field expansion available).
struct StokesletGradK {
  using value_type = Tensor3;
  static constexpr bool singular = true;
  Tensor3 operator()(const Vec3& x) const { return kern::stokeslet_grad(x); }
};

struct DegenerateGradK {
  using value_type = Tensor3;
  static constexpr bool singular = true;
  Tensor3 operator()(const Vec3& x) const { return kern::degenerate_grad(x); }
};

/// Result of a finite-difference audit of one kernel at one point.
struct FiniteDifferenceReport {
  double gradient_mismatch = 0.0;  ///< max |numeric grad - analytic grad|
  double row_divergence = 0.0;     ///< Stokes kernels only: max |div of a row|
  double symmetry_defect = 0.0;    ///< max |K(x) - K(-x)| and |K - K^T| for matrix kernels
};

/// Central differences with step h; requires |x| > 2h. The gradient check
/// applies to kernels that have an analytic gradient partner (G, grad G,
/// G_St, R_St); divergence is reported for the Stokes kernels.
FiniteDifferenceReport finite_difference_check(KernelId id, const Vec3& x, double h);

}  // namespace effmed
