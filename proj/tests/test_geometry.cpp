#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "effmed/geometry.hpp"
#include "effmed/kernels.hpp"
#include "effmed/quadrature.hpp"

#include <algorithm>
#include <cmath>

using namespace effmed;

namespace {

// Tensor Gauss-Legendre over a box, used as an oracle for smooth integrands.
template <class F>
auto box_gauss(const Vec3& lo, const Vec3& hi, int n, F&& f) {
  const auto qx = gauss_legendre(n, lo[0], hi[0]);
  const auto qy = gauss_legendre(n, lo[1], hi[1]);
  const auto qz = gauss_legendre(n, lo[2], hi[2]);
  std::decay_t<decltype(f(lo))> acc = f(lo) * 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        acc += qx.weights[i] * qy.weights[j] * qz.weights[k] * f(Vec3(qx.nodes[i], qy.nodes[j], qz.nodes[k]));
  return acc;
}

double laplacian_fd(const std::function<double(const Vec3&)>& f, const Vec3& x, double h) {
  double s = -6.0 * f(x);
  for (int k = 0; k < 3; ++k) s += f(x + h * Vec3::Unit(k)) + f(x - h * Vec3::Unit(k));
  return s / (h * h);
}

}  // namespace

TEST_CASE("ball cubature exactness") {
  for (int deg : {5, 7, 9, 12}) {
    const BallCubature q = BallCubature::of_degree(deg);
    double wsum = 0.0;
    for (double w : q.weights()) wsum += w;
    CHECK(std::abs(wsum - 4.0 * kPi / 3.0) <= 1e-12);
    for (int a = 0; a <= deg; ++a)
      for (int b = 0; a + b <= deg; ++b)
        for (int c = 0; a + b + c <= deg; ++c) {
          const double v = q.integrate(Vec3::Zero(), 1.0, [&](const Vec3& x) {
            return std::pow(x[0], a) * std::pow(x[1], b) * std::pow(x[2], c);
          });
          CHECK(std::abs(v - ball_monomial_integral(a, b, c)) <= 1e-10);
        }
  }
  const BallCubature q5 = BallCubature::degree5();
  CHECK(q5.size() == 48);
  CHECK(std::abs(q5.integrate(Vec3::Zero(), 1.0, [](const Vec3& x) { return x[0] * x[0]; }) - 4.0 * kPi / 15.0) <=
        1e-10);
  // scaled ball: int_{B(c, r)} 1 = 4 pi r^3 / 3
  CHECK(q5.integrate(Vec3(1, 2, 3), 0.1, [](const Vec3&) { return 1.0; }) ==
        doctest::Approx(4.0 * kPi / 3.0 * 1e-3).epsilon(1e-13));
}

TEST_CASE("gauss-legendre integrates polynomials") {
  const auto q = gauss_legendre(5, 0.0, 2.0);
  double s = 0.0;
  for (int i = 0; i < 5; ++i) s += q.weights[i] * std::pow(q.nodes[i], 9);
  CHECK(s == doctest::Approx(std::pow(2.0, 10) / 10.0).epsilon(1e-13));
  const auto one = gauss_legendre(1);
  CHECK(one.weights[0] == doctest::Approx(2.0));
}

TEST_CASE("domain basics") {
  CHECK_THROWS_AS(Domain::box(Vec3::Zero(), Vec3(1, 0, 1)), Error);
  CHECK_THROWS_AS(Domain::ball(Vec3::Zero(), 0.0), Error);
  const Domain b = Domain::ball(Vec3::Zero(), 2.0);
  CHECK(b.volume() == doctest::Approx(32.0 * kPi / 3.0));
  CHECK(b.contains(Vec3(0, 0, 2)));
  CHECK_FALSE(b.contains(Vec3(0, 0, 2.01)));
}

TEST_CASE("uniform ball potentials") {
  const Density rho = Density::uniform_ball(Vec3::Zero(), 1.0);
  CHECK(rho.potential(Vec3::Zero()) == doctest::Approx(3.0 / (8.0 * kPi)).epsilon(1e-14));
  CHECK(rho.potential(Vec3(0, 2, 0)) == doctest::Approx(1.0 / (8.0 * kPi)).epsilon(1e-14));
  const Vec3 far(300.0, -400.0, 0.0);
  CHECK(rho.potential(far) * 4.0 * kPi * far.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rho.potential_gradient(Vec3::Zero()).norm() == 0.0);

  const Mat3 s0 = rho.stokes_potential(Vec3::Zero());
  CHECK(std::abs(s0(0, 1)) < 1e-6);
  CHECK(std::abs(s0(1, 2)) < 1e-6);
  CHECK(s0(0, 0) == doctest::Approx(s0(2, 2)));

  const Vec3 x5(3.0, 4.0, 0.0);
  const Mat3 s5 = rho.stokes_potential(x5);
  CHECK((s5 - kern::stokeslet(x5)).norm() <= 0.02 * kern::stokeslet(x5).norm());

  const auto f = [&](const Vec3& x) { return rho.potential(x); };
  CHECK(std::abs(laplacian_fd(f, Vec3(0, 0, 2), 1e-3)) <= 1e-4);
  // inside: -Laplace(G * rho) = rho
  CHECK(laplacian_fd(f, Vec3(0.2, 0.1, 0.0), 1e-3) == doctest::Approx(-rho.sup()).epsilon(1e-6));
  CHECK(rho.mean_inverse_distance() == doctest::Approx(1.2));
}

TEST_CASE("ball Stokes potential against spherical quadrature") {
  const Density rho = Density::uniform_ball(Vec3(0.1, 0.0, -0.2), 1.0);
  for (const Vec3& x : {Vec3(2.0, 0.5, -0.3), Vec3(0.0, -1.7, 1.4)}) {
    const Mat3 ref = [&] {
      Mat3 acc = Mat3::Zero();
      const auto qr = gauss_legendre(30, 0.0, 1.0);
      const SphereRule sph = sphere_product_rule(30, 60);
      for (std::size_t i = 0; i < qr.nodes.size(); ++i)
        for (std::size_t a = 0; a < sph.directions.size(); ++a) {
          const Vec3 y = rho.center() + qr.nodes[i] * sph.directions[a];
          acc += qr.weights[i] * qr.nodes[i] * qr.nodes[i] * sph.weights[a] * rho.sup() * kern::stokeslet(x - y);
        }
      return acc;
    }();
    CHECK((rho.stokes_potential(x) - ref).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("radial profile reproduces the uniform ball") {
  const Vec3 c(0.3, -0.1, 0.2);
  const Density ball = Density::uniform_ball(c, 0.8);
  const Density prof = Density::radial_profile(c, {{0.0, 5.0}, {0.3, 5.0}, {0.8, 5.0}});
  CHECK(prof.sup() == doctest::Approx(ball.sup()).epsilon(1e-13));
  for (const Vec3& x : {Vec3(0.3, -0.1, 0.2), Vec3(0.5, 0.0, 0.1), Vec3(0.9, 0.4, -0.3), Vec3(2.0, 1.0, 0.0)}) {
    CHECK(prof.potential(x) == doctest::Approx(ball.potential(x)).epsilon(1e-12));
    CHECK((prof.potential_gradient(x) - ball.potential_gradient(x)).norm() <= 1e-12);
    CHECK((prof.stokes_potential(x) - ball.stokes_potential(x)).cwiseAbs().maxCoeff() <= 1e-12);
  }
  CHECK(prof.mean_inverse_distance() == doctest::Approx(ball.mean_inverse_distance()).epsilon(1e-12));
  CHECK(prof.integrate([](const Vec3&) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("radial profile with a linear ramp") {
  // rho ~ (1 - r) on the unit ball; mass normalisation 4 pi int r^2 (1 - r) = pi / 3
  const Density prof = Density::radial_profile(Vec3::Zero(), {{0.0, 1.0}, {1.0, 0.0}});
  CHECK(prof.sup() == doctest::Approx(3.0 / kPi).epsilon(1e-13));
  CHECK(std::abs(prof.integrate([](const Vec3&) { return 1.0; }) - 1.0) <= 1e-10);
  // (G * rho)(0) = int s rho ds = (3/pi) * 1/6
  CHECK(prof.potential(Vec3::Zero()) == doctest::Approx(0.5 / kPi).epsilon(1e-13));
  const auto f = [&](const Vec3& x) { return prof.potential(x); };
  const Vec3 x(0.3, 0.2, 0.1);
  CHECK(laplacian_fd(f, x, 1e-3) == doctest::Approx(-prof(x)).epsilon(1e-5));
  const Vec3 h = 1e-5 * Vec3::UnitY();
  CHECK((f(x + h) - f(x - h)) / 2e-5 == doctest::Approx(prof.potential_gradient(x)[1]).epsilon(1e-7));
}

TEST_CASE("box closed forms") {
  const Vec3 lo(0.0, 0.0, 0.0), hi(1.0, 2.0, 0.5);
  // exterior points: smooth integrand, Gauss oracle
  for (const Vec3& x : {Vec3(2.5, 1.0, 0.2), Vec3(-1.0, -1.0, 2.0), Vec3(0.5, 3.0, 0.25)}) {
    const double phi = box_gauss(lo, hi, 24, [&](const Vec3& y) { return 1.0 / (x - y).norm(); });
    CHECK(box::inverse_distance(x, lo, hi) == doctest::Approx(phi).epsilon(1e-10));
    const Vec3 g = box_gauss(lo, hi, 24, [&](const Vec3& y) -> Vec3 {
      const Vec3 d = x - y;
      return Vec3(-d / std::pow(d.norm(), 3));
    });
    CHECK((box::inverse_distance_grad(x, lo, hi) - g).norm() <= 1e-9 * g.norm());
    const Mat3 m = box_gauss(lo, hi, 24, [&](const Vec3& y) -> Mat3 { return kern::dyad(x - y); });
    CHECK((box::dyad(x, lo, hi) - m).cwiseAbs().maxCoeff() <= 1e-9 * m.norm());
  }
  // interior point: additivity over sub-boxes meeting at x exercises the degenerate corners
  const Vec3 x(0.3, 0.7, 0.2);
  double sum = 0.0;
  Vec3 gsum = Vec3::Zero();
  Mat3 msum = Mat3::Zero();
  for (int c = 0; c < 8; ++c) {
    Vec3 a, b;
    for (int k = 0; k < 3; ++k) {
      a[k] = (c >> k & 1) ? x[k] : lo[k];
      b[k] = (c >> k & 1) ? hi[k] : x[k];
    }
    sum += box::inverse_distance(x, a, b);
    gsum += box::inverse_distance_grad(x, a, b);
    msum += box::dyad(x, a, b);
  }
  CHECK(box::inverse_distance(x, lo, hi) == doctest::Approx(sum).epsilon(1e-13));
  CHECK((box::inverse_distance_grad(x, lo, hi) - gsum).norm() <= 1e-12);
  CHECK((box::dyad(x, lo, hi) - msum).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(box::dyad(x, lo, hi).trace() == doctest::Approx(box::inverse_distance(x, lo, hi)).epsilon(1e-13));
  // -Laplace Phi = 4 pi inside
  const auto f = [&](const Vec3& p) { return box::inverse_distance(p, lo, hi); };
  CHECK(laplacian_fd(f, x, 1e-3) == doctest::Approx(-4.0 * kPi).epsilon(1e-6));
  // gradient is the derivative of the potential
  const Vec3 h = 1e-6 * Vec3::UnitZ();
  CHECK((f(x + h) - f(x - h)) / 2e-6 == doctest::Approx(box::inverse_distance_grad(x, lo, hi)[2]).epsilon(1e-7));
  // cube centre: isotropic dyad
  const Mat3 mc = box::dyad(Vec3::Constant(0.5), Vec3::Zero(), Vec3::Ones());
  CHECK((mc - mc.trace() / 3.0 * Mat3::Identity()).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("uniform box density") {
  const Density rho = Density::uniform_box(Vec3::Zero(), Vec3::Ones());
  CHECK(rho.integrate([](const Vec3&) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-12));
  // classical constant: mean inverse distance in the unit cube
  CHECK(rho.mean_inverse_distance() == doctest::Approx(1.8823126443896601).epsilon(1e-6));
  const Vec3 x(3.0, 0.5, 0.5);
  const Mat3 ref = box_gauss(Vec3::Zero(), Vec3::Ones(), 20, [&](const Vec3& y) -> Mat3 { return kern::stokeslet(x - y); });
  CHECK((rho.stokes_potential(x) - ref).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("translation moves every potential") {
  const Density rho = Density::uniform_box(Vec3::Zero(), Vec3(1, 1, 2));
  const Vec3 s(0.25, -3.0, 1.5);
  const Density t = rho.translated(s);
  const Vec3 x(0.4, 0.1, 0.9);
  CHECK(t.potential(x + s) == doctest::Approx(rho.potential(x)).epsilon(1e-12));
  CHECK((t.stokes_potential(x + s) - rho.stokes_potential(x)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("periodic generator") {
  const Configuration c2 = generate_periodic(2, Domain::unit_cube());
  CHECK(c2.size() == 8);
  CHECK(c2.centers[0].isApprox(Vec3::Constant(0.25)));
  CHECK(min_distance(c2.centers) == doctest::Approx(0.5));
  const Configuration c1 = generate_periodic(1, Domain::unit_cube());
  CHECK(c1.centers[0].isApprox(Vec3::Constant(0.5)));
  const Configuration c10 = generate_periodic(10, Domain::unit_cube());
  CHECK(min_distance(c10.centers) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(c10.radius == doctest::Approx(1e-3));
  c10.validate();
  const Configuration cf = generate_periodic(5, Domain::unit_cube(), Scaling::fraction(0.02));
  CHECK(std::abs(cf.volume_fraction() - 0.02) <= 1e-12 * 0.02);
  cf.validate();
}

TEST_CASE("i.i.d. generator") {
  const Density ball = Density::uniform_ball(Vec3::Zero(), 1.0);
  const Configuration a = generate_iid(1000, ball, 7);
  Vec3 mean = Vec3::Zero();
  for (const auto& x : a.centers) mean += x;
  mean /= 1000.0;
  CHECK(mean.norm() < 0.05);
  a.validate();
  const Configuration b = generate_iid(1000, ball, 7);
  CHECK(std::equal(a.centers.begin(), a.centers.end(), b.centers.begin(),
                   [](const Vec3& p, const Vec3& q) { return p == q; }));
  const Configuration one = generate_iid(1, Density::uniform_box(Vec3::Zero(), Vec3::Ones()), 3);
  CHECK(one.size() == 1);
  CHECK(one.domain.contains(one.centers[0]));
  // a volume fraction beyond what random placement can reach
  CHECK_THROWS_AS(generate_iid(200, ball, 1, Scaling::fraction(0.9)), Error);
}

TEST_CASE("hardcore generator") {
  const Density cube = Density::uniform_box(Vec3::Zero(), Vec3::Ones());
  const Configuration h = generate_hardcore(100, cube, 1.0, 9);
  CHECK(min_distance_exhaustive(h.centers) >= std::cbrt(0.01));
  h.validate();
  // c = 1.5 at n = 500 fails the packing check (500 * 1.5^3 / 500 > 6 / pi)
  CHECK_THROWS_AS(generate_hardcore(500, cube, 1.5, 4), Error);
  const Configuration h500 = generate_hardcore(500, cube, 0.8, 4);
  CHECK(min_distance(h500.centers) == min_distance_exhaustive(h500.centers));
  CHECK(min_distance(h500.centers) >= 0.8 / std::cbrt(500.0));
  // c = 0 draws the same points as the i.i.d. generator
  const Configuration z = generate_hardcore(300, cube, 0.0, 12);
  const Configuration i = generate_iid(300, cube, 12);
  CHECK(std::equal(z.centers.begin(), z.centers.end(), i.centers.begin(),
                   [](const Vec3& p, const Vec3& q) { return p == q; }));
  CHECK_THROWS_AS(generate_hardcore(1000, cube, 1.3, 1), Error);
  try {
    generate_hardcore(1000, cube, 1.2, 1);
    FAIL("expected saturation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Saturated);
    CHECK(std::string(e.what()).find("placing") != std::string::npos);
  }
}

TEST_CASE("poisson generator") {
  const Domain cube = Domain::unit_cube();
  int inside = 0;
  std::vector<double> n1, n2;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const Configuration p = generate_poisson(1000.0, cube, 1.0, s);
    if (std::abs(static_cast<double>(p.size()) - 1000.0) <= 3.0 * std::sqrt(1000.0)) ++inside;
    double a = 0, b = 0;
    for (const auto& x : p.centers) {
      if (x[0] < 0.3) ++a;
      else if (x[0] > 0.6) ++b;
    }
    n1.push_back(a);
    n2.push_back(b);
  }
  CHECK(inside >= 196);
  // 2x2 contingency table of above/below-median counts in two disjoint windows
  auto median = [](std::vector<double> v) {
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
  };
  const double m1 = median(n1), m2 = median(n2);
  double t[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t k = 0; k < n1.size(); ++k) t[n1[k] > m1][n2[k] > m2] += 1;
  double chi2 = 0.0;
  const double total = 200.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double e = (t[i][0] + t[i][1]) * (t[0][j] + t[1][j]) / total;
      chi2 += (t[i][j] - e) * (t[i][j] - e) / e;
    }
  CHECK(chi2 < 10.83);

  const Configuration empty = generate_poisson(1e-9, cube, 1.0, 1);
  CHECK(empty.size() == 0);
  CHECK(empty.radius == 0.0);
  empty.validate();
}

TEST_CASE("bucketed minimum distance equals the exhaustive scan") {
  const Density cube = Density::uniform_box(Vec3::Zero(), Vec3::Ones());
  const Configuration c = generate_iid(2000, cube, 77);
  CHECK(min_distance(c.centers) == min_distance_exhaustive(c.centers));
  std::vector<Vec3> clustered = c.centers;
  clustered.push_back(Vec3(0.5, 0.5, 0.5));
  clustered.push_back(Vec3(0.5, 0.5, 0.5 + 1e-9));
  CHECK(min_distance(clustered) == min_distance_exhaustive(clustered));
  std::vector<Vec3> sparse = {Vec3::Zero(), Vec3(100, 0, 0)};
  for (int k = 0; k < 70; ++k) sparse.push_back(Vec3(50.0 + 0.7 * k, 3.0 * k, 0.0));
  CHECK(min_distance(sparse) == min_distance_exhaustive(sparse));
  CHECK(std::isinf(min_distance({Vec3::Zero()})));
}

TEST_CASE("empirical measure converges for periodic configurations") {
  const Density cube = Density::uniform_box(Vec3::Zero(), Vec3::Ones());
  const auto phi = [](const Vec3& x) { return x[0] * x[0] * x[1] + 0.5 * x[2] * x[2] * x[2] - x[0] * x[2]; };
  const double exact = cube.integrate(phi, 4);
  double prev = 1e9;
  for (int m : {2, 4, 8, 16}) {
    const Configuration c = generate_periodic(m, Domain::unit_cube());
    double s = 0.0;
    for (const auto& x : c.centers) s += phi(x);
    const double err = std::abs(s / c.size() - exact);
    CHECK(err < prev);
    CHECK(err <= 1.0 * std::cbrt(1.0 / c.size()));
    prev = err;
  }
}

TEST_CASE("configuration validation catches broken invariants") {
  Configuration c = generate_periodic(3, Domain::unit_cube());
  c.centers[1] = c.centers[0] + Vec3(1e-3, 0, 0);
  CHECK_THROWS_AS(c.validate(), Error);
  Configuration d = generate_periodic(3, Domain::unit_cube());
  d.radius *= 1.01;
  CHECK_THROWS_AS(d.validate(), Error);
  Configuration e = generate_periodic(3, Domain::unit_cube());
  e.centers[0] = Vec3(2, 0, 0);
  CHECK_THROWS_AS(e.validate(), Error);
}
