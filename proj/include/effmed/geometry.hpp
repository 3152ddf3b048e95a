#pragma once

// Domains, densities, sphere configurations and their generators.

#include "effmed/random.hpp"
#include "effmed/types.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace effmed {

struct Domain {
  enum class Kind { Box, Ball };

  Kind kind = Kind::Box;
  Vec3 lo = Vec3::Zero();  // box
  Vec3 hi = Vec3::Ones();  // box
  Vec3 center = Vec3::Zero();  // ball
  double radius = 1.0;         // ball

  static Domain box(const Vec3& lo, const Vec3& hi);
  static Domain ball(const Vec3& center, double radius);
  static Domain unit_cube() { return box(Vec3::Zero(), Vec3::Ones()); }

  double volume() const;
  bool contains(const Vec3& x, double tol = 0.0) const;
  Vec3 bbox_lo() const;
  Vec3 bbox_hi() const;
  Vec3 centroid() const;
  Domain translated(const Vec3& shift) const;
};

/// Probability density rho with compact support K_rho. Total mass is 1.
class Density {
 public:
  enum class Kind { UniformBall, UniformBox, RadialProfile };

  static Density uniform_ball(const Vec3& center, double radius);
  static Density uniform_box(const Vec3& lo, const Vec3& hi);
  /// Piecewise-linear radial profile; the table values are rescaled so that
  /// the mass is 1. r must start at 0 and be strictly increasing.
  static Density radial_profile(const Vec3& center, std::vector<std::pair<double, double>> table);

  Kind kind() const { return kind_; }
  const Domain& support() const { return support_; }
  double support_volume() const { return support_.volume(); }
  double sup() const { return sup_; }
  const std::vector<std::pair<double, double>>& table() const { return table_; }
  bool is_radial() const { return kind_ != Kind::UniformBox; }
  Vec3 center() const { return support_.centroid(); }

  double operator()(const Vec3& x) const;

  /// (G * rho)(x), G = 1/(4 pi |x|).
  double potential(const Vec3& x) const;
  Vec3 potential_gradient(const Vec3& x) const;
  /// (G_St * rho)(x).
  Mat3 stokes_potential(const Vec3& x) const;
  /// Double integral of rho(x) rho(y) / |x - y|.
  double mean_inverse_distance() const;

  /// Integral of f(x) rho(x) dx by tensor Gauss rules over the support.
  double integrate(const std::function<double(const Vec3&)>& f, int order = 24) const;

  Density translated(const Vec3& shift) const;

  /// Radial-profile helpers (valid when is_radial()).
  double radial_value(double r) const;

 private:
  Kind kind_ = Kind::UniformBall;
  Domain support_;
  double sup_ = 0.0;
  std::vector<std::pair<double, double>> table_;  // (r, value) after normalization
};

/// Closed-form integrals over the axis-aligned box [lo, hi] in y, for the
/// target x (any position, inside or outside).
namespace box {
/// int 1/|x - y| dy
double inverse_distance(const Vec3& x, const Vec3& lo, const Vec3& hi);
/// gradient in x of inverse_distance
Vec3 inverse_distance_grad(const Vec3& x, const Vec3& lo, const Vec3& hi);
/// int (x - y)(x)(x - y)/|x - y|^3 dy
Mat3 dyad(const Vec3& x, const Vec3& lo, const Vec3& hi);
}  // namespace box

enum class ScalingKind { Reflexive, Fraction, Power };

/// How the common radius r_n follows n.
struct Scaling {
  ScalingKind kind = ScalingKind::Reflexive;
  double lambda = 0.0;    ///< Fraction: volume fraction
  double exponent = 1.0;  ///< Power: r_n = n^{-exponent}

  static Scaling reflexive() { return {}; }
  static Scaling fraction(double lambda) { return {ScalingKind::Fraction, lambda, 1.0}; }
  static Scaling power(double exponent) { return {ScalingKind::Power, 0.0, exponent}; }

  double radius(std::size_t n, double support_volume) const;
};

enum class GeneratorKind { Periodic, Iid, Hardcore, Poisson, Explicit };

struct GeneratorInfo {
  GeneratorKind kind = GeneratorKind::Explicit;
  double c = 0.0;        ///< hardcore separation constant
  double lambda0 = 0.0;  ///< poisson intensity
  double epsilon = 1.0;  ///< poisson scale
  int side = 0;          ///< periodic side count m
  std::uint64_t seed = 0;
  long retries = 0;
};

/// n disjoint balls B(x_i, r_n) of common radius.
struct Configuration {
  std::vector<Vec3> centers;
  double radius = 0.0;
  Scaling scaling;
  GeneratorInfo generator;
  Domain domain;                ///< the compact set K holding the centers
  double support_volume = 1.0;  ///< |K_rho| entering the volume fraction

  std::size_t size() const { return centers.size(); }
  /// lambda_n = (4 pi / 3) n r^3 / |K_rho|
  double volume_fraction() const;
  /// Checks every invariant (inside K, disjoint, scaling consistency).
  /// Poisson configurations skip disjointness.
  void validate() const;

  Configuration translated(const Vec3& shift) const;
};

/// Minimal pairwise center distance; +inf for fewer than two centers.
double min_distance_exhaustive(const std::vector<Vec3>& pts);
/// Same value through a uniform bucket grid.
double min_distance(const std::vector<Vec3>& pts);
/// Indices of the closest pair (exhaustive).
std::pair<std::size_t, std::size_t> closest_pair(const std::vector<Vec3>& pts);

Configuration generate_periodic(int m, const Domain& box, Scaling scaling = Scaling::reflexive());
Configuration generate_iid(std::size_t n, const Density& rho, std::uint64_t seed,
                           Scaling scaling = Scaling::reflexive());
Configuration generate_hardcore(std::size_t n, const Density& rho, double c, std::uint64_t seed,
                                Scaling scaling = Scaling::reflexive());
/// Poisson points of intensity lambda0 / eps^3 in `window`. The radius comes
/// from `scaling` evaluated at the realized n (0 when n = 0). Disjointness is
/// not enforced.
Configuration generate_poisson(double lambda0, const Domain& window, double eps, std::uint64_t seed,
                               Scaling scaling = Scaling::fraction(0.01));

}  // namespace effmed
