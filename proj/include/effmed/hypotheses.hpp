#pragma once

// Separation functionals evaluated on one configuration.

#include "effmed/geometry.hpp"
#include "effmed/kernel_sum.hpp"

#include <optional>
#include <string>
#include <vector>

namespace effmed {

struct HypothesisOptions {
  int cubature_degree = 5;
  SumMethod method = SumMethod::Direct;
  double theta = 0.4;
};

struct H1Result {
  double d_n = 0.0;  ///< +inf for n < 2
  double h1_margin = 0.0;  ///< n d_n
  double a1_margin = 0.0;  ///< d_n / r_n
  bool h1_pass = false;    ///< d_n >= c / n
  bool a1_pass = false;    ///< d_n >= c r_n
  bool c_above_two = false;
};

H1Result h1_check(const Configuration& config, double c);

/// A functional value with its additive breakdown.
struct Functional {
  double value = 0.0;
  std::vector<std::string> term_names;
  std::vector<double> terms;     ///< sums to value
  std::vector<double> per_ball;  ///< contribution of each ball, canonical (sorted) order
};

/// sum_i int_{B_i} n^2 |n^-1 sum_{j!=i} G - G*rho|^2 + n^-2 |sum_{j!=i} grad G|^2.
/// Requires reflexive scaling.
Functional h2_value(const Configuration& config, const Density& rho, const HypothesisOptions& opt = {});

/// Stokes version with G_St, grad G_St, R_St and grad R_St (Frobenius norms).
Functional h2prime_value(const Configuration& config, const Density& rho, const HypothesisOptions& opt = {});

/// (1/n) sum_i ((1/n) sum_{j!=i} 1/|x_i - x_j| - int rho(y)/|x_i - y| dy)^2.
double h2sharp_value(const Configuration& config, const Density& rho, const HypothesisOptions& opt = {});

/// Same with the dyad kernel (x (x) x)/|x|^3, Frobenius norm.
double h2prime_sharp_value(const Configuration& config, const Density& rho, const HypothesisOptions& opt = {});

/// |n^-2 sum_{i!=j} 1/|x_i - x_j| - int int rho(x) rho(y)/|x - y||.
double weaksep_gap(const Configuration& config, const Density& rho);

/// Smooth test field phi given through its gradient.
struct TestField {
  enum class Kind { Linear, Quadratic, Gaussian };
  Kind kind = Kind::Linear;
  Vec3 direction = Vec3::UnitX();  ///< Linear: grad phi = direction
  int axis = 0;                    ///< Quadratic: phi = (x_a - c_a)^2 / 2
  Vec3 center = Vec3::Zero();      ///< Quadratic, Gaussian
  double width = 1.0;              ///< Gaussian: phi = exp(-|x - c|^2 / (2 w^2))

  std::string name() const;
  Vec3 grad(const Vec3& x) const;
  /// sup of |grad phi| over the domain (the whole space for Gaussian/Linear).
  double grad_sup(const Domain& domain) const;
};

/// 3 linear, 3 quadratic and 1 Gaussian field adapted to the domain.
std::vector<TestField> a2_test_fields(const Domain& domain);

struct A2Result {
  double value = 0.0;          ///< n^-2 sum_i int_{B_i} |sum_{j!=i} grad V(x - x_j) grad phi(x_j)|^2
  double grad_sup = 0.0;       ///< ||grad phi||_inf
  double lambda = 0.0;
  double eta = 0.0;            ///< value / ||grad phi||^2
  double ratio_lambda2 = 0.0;  ///< value / (lambda^2 ||grad phi||^2)
  std::string field;
};

/// Requires fraction scaling.
A2Result a2_value(const Configuration& config, const TestField& field, const HypothesisOptions& opt = {});
/// Maximum of eta over a2_test_fields(config.domain); a lower bound of the
/// supremum over all smooth fields.
A2Result a2_family_max(const Configuration& config, const HypothesisOptions& opt = {});

/// Pair correlation rho_2(0, z) of a stationary process of intensity lambda0.
struct PairCorrelationModel {
  enum class Kind { Poisson, Hardcore };
  Kind kind = Kind::Poisson;
  double lambda0 = 1.0;
  double c = 0.0;  ///< hardcore: rho_2 = 0 for |z| < c lambda0^{-1/3}

  double operator()(double r) const;
  /// Exclusion radius (0 for Poisson).
  double exclusion_radius() const;
};

/// (lambda / lambda0^3) int rho_2(0, z) / (|z|^6 + (lambda / lambda0)^2) dz.
double cond_rho2_value(const PairCorrelationModel& model, double lambda);

struct HypothesisReport {
  std::size_t n = 0;
  double radius = 0.0;
  H1Result h1;
  double c = 2.0;
  std::optional<Functional> h2;       ///< reflexive scaling only
  std::optional<Functional> h2prime;  ///< reflexive scaling only
  double h2sharp = 0.0;
  double h2prime_sharp = 0.0;
  double weaksep_gap = 0.0;
  std::optional<A2Result> a2;         ///< fraction scaling only
  // metadata
  int cubature_degree = 5;
  SumMethod method = SumMethod::Direct;
  double theta = 0.4;
  std::string matrix_norm = "frobenius";
};

HypothesisReport hypothesis_report(const Configuration& config, const Density& rho, double c = 2.0,
                                   const HypothesisOptions& opt = {});

}  // namespace effmed
