#pragma once

// Brute-force references shared by the unit and acceptance tests. Written
// from the closed forms, independently of the library kernels.

#include "effmed/types.hpp"

#include <cmath>
#include <functional>

namespace oracle {

using effmed::kPi;
using effmed::Mat3;
using effmed::Vec3;

// Midpoint rule in (r, cos theta, phi) with the r^2 Jacobian: 40 x 50 x 50
// = 1e5 samples per ball.
inline double dense_ball(const Vec3& center, double radius, const std::function<double(const Vec3&)>& f) {
  const int nr = 40, nc = 50, np = 50;
  const double dr = radius / nr, dc = 2.0 / nc, dp = 2.0 * kPi / np;
  double s = 0.0;
  for (int a = 0; a < nr; ++a) {
    const double r = (a + 0.5) * dr;
    for (int b = 0; b < nc; ++b) {
      const double ct = -1.0 + (b + 0.5) * dc;
      const double st = std::sqrt(1.0 - ct * ct);
      for (int c = 0; c < np; ++c) {
        const double ph = (c + 0.5) * dp;
        s += r * r * f(center + r * Vec3(st * std::cos(ph), st * std::sin(ph), ct));
      }
    }
  }
  return s * dr * dc * dp;
}

// Independent kernel formulas.
inline double g_lap(const Vec3& x) { return 1.0 / (4.0 * kPi * x.norm()); }
inline Vec3 grad_lap(const Vec3& x) { return -x / (4.0 * kPi * std::pow(x.norm(), 3)); }
inline Mat3 hess_lap(const Vec3& x) {
  const double r = x.norm();
  return (3.0 * x * x.transpose() / std::pow(r, 5) - Mat3::Identity() / std::pow(r, 3)) / (4.0 * kPi);
}
inline Mat3 g_st(const Vec3& x) {
  const double r = x.norm();
  return (Mat3::Identity() / r + x * x.transpose() / (r * r * r)) / (8.0 * kPi);
}
inline Mat3 r_st(const Vec3& x) {
  const double r = x.norm();
  return (Mat3::Identity() / (3.0 * r * r * r) - x * x.transpose() / std::pow(r, 5)) / (8.0 * kPi);
}
// squared Frobenius norm of the gradient by central differences
inline double grad_frob2(const std::function<Mat3(const Vec3&)>& k, const Vec3& x) {
  const double h = 1e-5 * x.norm();
  double s = 0.0;
  for (int d = 0; d < 3; ++d) s += ((k(x + h * Vec3::Unit(d)) - k(x - h * Vec3::Unit(d))) / (2.0 * h)).squaredNorm();
  return s;
}

// Uniform unit-mass ball of radius R at the origin.
inline double ball_pot(const Vec3& x, double R) {
  const double r = x.norm();
  return r <= R ? (3.0 * R * R - r * r) / (8.0 * kPi * R * R * R) : 1.0 / (4.0 * kPi * r);
}
// G_St * rho = (2 Phi I - grad grad B) / (8 pi), Phi = int rho/|x-y|,
// B = int |x-y| rho; B' and B'' from Delta B = 2 Phi.
inline Mat3 ball_stokes(const Vec3& x, double R) {
  const double r = x.norm();
  const double phi = 4.0 * kPi * ball_pot(x, R);
  double b1, b2;
  if (r <= R) {
    b1 = r / R - r * r * r / (5.0 * R * R * R);
    b2 = 1.0 / R - 3.0 * r * r / (5.0 * R * R * R);
  } else {
    b1 = 1.0 - R * R / (5.0 * r * r);
    b2 = 2.0 * R * R / (5.0 * r * r * r);
  }
  const Vec3 e = x / r;
  const Mat3 ee = e * e.transpose();
  return (2.0 * phi * Mat3::Identity() - (b2 * ee + b1 / r * (Mat3::Identity() - ee))) / (8.0 * kPi);
}

}  // namespace oracle
