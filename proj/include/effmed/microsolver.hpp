#pragma once

// Perforated-domain solves by singularity collocation: one monopole, Stokeslet
// or dipole per ball, collocated at the centres.

#include "effmed/geometry.hpp"
#include "effmed/hypotheses.hpp"
#include "effmed/kernel_sum.hpp"

#include <string>
#include <vector>

namespace effmed {

/// One Gaussian bump (2 pi s^2)^{-3/2} exp(-|x - c|^2 / (2 s^2)) times a
/// scalar mass (scalar mode) or a force vector (Stokes mode).
struct GaussianBump {
  Vec3 center = Vec3::Zero();
  double width = 0.1;
  double mass = 1.0;
  Vec3 force = Vec3::Zero();
};

/// Source term g as a finite sum of Gaussian bumps.
class SourceField {
 public:
  SourceField() = default;
  explicit SourceField(std::vector<GaussianBump> bumps);
  static SourceField gaussian(const Vec3& center, double width, double mass = 1.0);
  static SourceField gaussian_force(const Vec3& center, double width, const Vec3& force);

  const std::vector<GaussianBump>& bumps() const { return bumps_; }
  bool empty() const { return bumps_.empty(); }

  double operator()(const Vec3& x) const;
  Vec3 vector_value(const Vec3& x) const;
  double total_mass() const;
  Vec3 total_force() const;

  /// (G * g)(x), erf form.
  double potential(const Vec3& x) const;
  Vec3 potential_gradient(const Vec3& x) const;
  /// (G_St * g)(x) for the vector (force) amplitudes.
  Vec3 stokes_potential(const Vec3& x) const;

  SourceField transformed(const Mat3& rotation, const Vec3& shift) const;
  SourceField scaled(double factor) const;
  SourceField operator+(const SourceField& other) const;

 private:
  std::vector<GaussianBump> bumps_;
};

/// Field the balls are immersed in: the whole-space response to g, or a
/// polynomial stand-in u = u0 + e . x (scalar) / U = e (Stokes).
struct Background {
  enum class Kind { Source, Affine };
  Kind kind = Kind::Source;
  SourceField source;
  double u0 = 0.0;
  Vec3 e = Vec3::Zero();

  static Background of(SourceField g);
  static Background affine(double u0, const Vec3& gradient);
  static Background velocity(const Vec3& u);

  double value(const Vec3& x) const;
  Vec3 gradient(const Vec3& x) const;
  Vec3 velocity_at(const Vec3& x) const;
  /// int_{B(c, r)} g (0 for the affine kind).
  double source_integral(const Vec3& c, double r) const;
};

enum class Problem { DirichletLaplace, DirichletStokes, Conductor };
enum class MicroMethod { Direct, Reflections };

std::string problem_name(Problem p);
Problem problem_from_name(const std::string& name);

struct MicroOptions {
  MicroMethod method = MicroMethod::Direct;
  double omega = 0.5;      ///< reflections damping
  int max_sweeps = 500;
  double tol = 1e-8;       ///< reflections: relative strength update
  bool pure_stokeslet = false;  ///< drop the r^2 R_St term off the diagonal
};

struct MicroDiagnostics {
  std::string method;
  int iterations = 0;
  double residual = 0.0;  ///< ||A s - b|| / ||b||
  double min_gap = 0.0;   ///< min (|x_i - x_j| - 2 r) / r
  std::vector<std::string> warnings;
};

struct MicroSolution {
  Problem problem = Problem::DirichletLaplace;
  Configuration config;
  Background background;
  bool pure_stokeslet = false;
  std::vector<double> charges;  ///< Laplace
  std::vector<Vec3> vectors;    ///< Stokes forces or conductor dipoles
  MicroDiagnostics diagnostics;

  /// Laplace and conductor: u_n at the points.
  std::vector<double> evaluate(const std::vector<Vec3>& points, const SumOptions& sum = {}) const;
  /// Stokes: velocity at the points.
  std::vector<Vec3> evaluate_velocity(const std::vector<Vec3>& points, const SumOptions& sum = {}) const;
};

MicroSolution solve_dirichlet_laplace(const Configuration& config, const Background& bg, const MicroOptions& opt = {});
MicroSolution solve_dirichlet_stokes(const Configuration& config, const Background& bg, const MicroOptions& opt = {});
MicroSolution solve_conductor(const Configuration& config, const Background& bg, const MicroOptions& opt = {});
MicroSolution solve_micro(Problem p, const Configuration& config, const Background& bg, const MicroOptions& opt = {});

struct ResidualReport {
  std::vector<double> per_ball;     ///< max boundary-condition violation on the 26 samples
  std::vector<double> flux_defect;  ///< conductor only
  double max = 0.0;
  double max_flux_defect = 0.0;
};

/// Laplace: |u_n|; Stokes: |u_n|; conductor: |u_n - mean over the samples|.
ResidualReport boundary_residual(const MicroSolution& sol);

/// Explicit approximate correctors built from truncated kernels.
/// Scalar: 4 pi sum_i G_trunc(n (x - x_i)) - 4 pi (G * rho)(x), with
/// n = 1 / r_n. rho may be null (rho = 0).
double corrector_phi1(const Configuration& config, const Density* rho, const Vec3& x);
/// Stokes: 6 pi sum_i G_St_trunc(n (x - x_i)) - 6 pi (G_St * rho)(x).
Mat3 corrector_phi1_stokes(const Configuration& config, const Density* rho, const Vec3& x);
/// Conductor: 3 lambda |K_rho| (V * (rho grad phi))(x)
///            - 4 pi r_n sum_i grad phi(x_i) . V_trunc((x - x_i) / r_n).
double corrector_phi1_conductor(const Configuration& config, const Density* rho, const TestField& phi, const Vec3& x);

}  // namespace effmed
