#include "effmed/quadrature.hpp"

#include <cmath>

namespace effmed {

QuadratureRule1D gauss_legendre(int n, double a, double b) {
  require(n >= 1, "gauss_legendre needs n >= 1");
  QuadratureRule1D rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n == 1 ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = mid - half * x;
    rule.nodes[n - 1 - i] = mid + half * x;
    rule.weights[i] = rule.weights[n - 1 - i] = half * w;
  }
  return rule;
}

BallCubature BallCubature::degree5() {
  const double phi = 0.5 * (1.0 + std::sqrt(5.0));
  std::vector<Vec3> dirs;
  for (double s1 : {-1.0, 1.0})
    for (double s2 : {-1.0, 1.0}) {
      dirs.emplace_back(0.0, s1, s2 * phi);
      dirs.emplace_back(s1, s2 * phi, 0.0);
      dirs.emplace_back(s2 * phi, 0.0, s1);
    }
  for (auto& d : dirs) d.normalize();

  const QuadratureRule1D radial = gauss_legendre(4, 0.0, 1.0);
  std::vector<Vec3> nodes;
  std::vector<double> weights;
  for (std::size_t k = 0; k < radial.nodes.size(); ++k) {
    const double r = radial.nodes[k];
    for (const auto& d : dirs) {
      nodes.push_back(r * d);
      weights.push_back(radial.weights[k] * r * r * 4.0 * kPi / 12.0);
    }
  }
  return BallCubature(5, std::move(nodes), std::move(weights));
}

BallCubature BallCubature::product(int degree) {
  require(degree >= 1, "cubature degree must be >= 1");
  const int nr = (degree + 4) / 2;
  const SphereRule sphere = sphere_product_rule((degree + 2) / 2, degree + 1);
  const QuadratureRule1D radial = gauss_legendre(nr, 0.0, 1.0);
  std::vector<Vec3> nodes;
  std::vector<double> weights;
  for (std::size_t k = 0; k < radial.nodes.size(); ++k) {
    const double r = radial.nodes[k];
    for (std::size_t a = 0; a < sphere.directions.size(); ++a) {
      nodes.push_back(r * sphere.directions[a]);
      weights.push_back(radial.weights[k] * r * r * sphere.weights[a]);
    }
  }
  return BallCubature(degree, std::move(nodes), std::move(weights));
}

BallCubature BallCubature::of_degree(int degree) { return degree <= 5 ? degree5() : product(degree); }

std::vector<Vec3> BallCubature::nodes_on(const Vec3& center, double radius) const {
  std::vector<Vec3> out;
  out.reserve(nodes_.size());
  for (const auto& n : nodes_) out.push_back(center + radius * n);
  return out;
}

double ball_monomial_integral(int a, int b, int c) {
  if (a % 2 || b % 2 || c % 2) return 0.0;
  const double ba = 0.5 * (a + 1), bb = 0.5 * (b + 1), bc = 0.5 * (c + 1);
  const double sphere = 2.0 * std::tgamma(ba) * std::tgamma(bb) * std::tgamma(bc) / std::tgamma(ba + bb + bc);
  return sphere / (a + b + c + 3);
}

const std::vector<Vec3>& sphere_sample26() {
  static const std::vector<Vec3> dirs = [] {
    std::vector<Vec3> d;
    for (int i = -1; i <= 1; ++i)
      for (int j = -1; j <= 1; ++j)
        for (int k = -1; k <= 1; ++k)
          if (i || j || k) d.push_back(Vec3(i, j, k).normalized());
    return d;
  }();
  return dirs;
}

SphereRule sphere_product_rule(int n_theta, int n_phi) {
  require(n_theta >= 1 && n_phi >= 1, "sphere rule needs positive sizes");
  const QuadratureRule1D ct = gauss_legendre(n_theta, -1.0, 1.0);
  SphereRule rule;
  for (int i = 0; i < n_theta; ++i) {
    const double z = ct.nodes[i];
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    for (int j = 0; j < n_phi; ++j) {
      const double ph = 2.0 * kPi * (j + 0.5) / n_phi;
      rule.directions.emplace_back(s * std::cos(ph), s * std::sin(ph), z);
      rule.weights.push_back(ct.weights[i] * 2.0 * kPi / n_phi);
    }
  }
  return rule;
}

}  // namespace effmed
