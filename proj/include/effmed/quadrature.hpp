#pragma once

#include "effmed/types.hpp"

#include <vector>

namespace effmed {

struct QuadratureRule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [a, b].
QuadratureRule1D gauss_legendre(int n, double a = -1.0, double b = 1.0);

/// Cubature on the unit ball B(0, 1). Nodes are offsets inside the ball; the
/// weights sum to 4 pi / 3 and integrate every polynomial of total degree
/// <= `degree` exactly.
class BallCubature {
 public:
  /// Degree-5 product rule: 4-point Gauss-Legendre in r times the 12
  /// icosahedron vertices (a spherical 5-design). 48 nodes.
  static BallCubature degree5();

  /// Product rule of arbitrary degree: Gauss-Legendre in r, Gauss-Legendre in
  /// cos(theta), trapezoid in phi.
  static BallCubature product(int degree);

  /// degree5() for degree <= 5, product(degree) above.
  static BallCubature of_degree(int degree);

  int degree() const { return degree_; }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<Vec3>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }

  /// Nodes mapped onto B(center, radius).
  std::vector<Vec3> nodes_on(const Vec3& center, double radius) const;

  template <class F>
  auto integrate(const Vec3& center, double radius, F&& f) const {
    using R = std::decay_t<decltype(f(center))>;
    R acc = f(center) * 0.0;
    const double scale = radius * radius * radius;
    for (std::size_t q = 0; q < nodes_.size(); ++q) acc += (weights_[q] * scale) * f(center + radius * nodes_[q]);
    return acc;
  }

 private:
  BallCubature(int degree, std::vector<Vec3> nodes, std::vector<double> weights)
      : degree_(degree), nodes_(std::move(nodes)), weights_(std::move(weights)) {}

  int degree_;
  std::vector<Vec3> nodes_;
  std::vector<double> weights_;
};

/// Exact integral of x^a y^b z^c over the unit ball.
double ball_monomial_integral(int a, int b, int c);

/// 26 unit directions: normalized nonzero points of {-1, 0, 1}^3. Used as the
/// fixed boundary sample on every sphere.
const std::vector<Vec3>& sphere_sample26();

/// Product rule on the unit sphere (Gauss in cos(theta) x trapezoid in phi);
/// weights sum to 4 pi.
struct SphereRule {
  std::vector<Vec3> directions;
  std::vector<double> weights;
};
SphereRule sphere_product_rule(int n_theta, int n_phi);

}  // namespace effmed
