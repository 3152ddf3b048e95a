#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "effmed/microsolver.hpp"
#include "effmed/quadrature.hpp"

#include <Eigen/Geometry>
#include <cmath>

using namespace effmed;

namespace {

Configuration explicit_config(std::vector<Vec3> centers, double radius, const Domain& domain) {
  Configuration c;
  c.centers = std::move(centers);
  c.scaling = Scaling::power(1.0);
  c.domain = domain;
  c.support_volume = domain.volume();
  c.radius = radius;
  return c;
}

// int f(x + t w) t^2 dt dw over the ball B(x, R): Gauss in t, product rule in w.
template <class F>
auto spherical_quad(const Vec3& x, double R, F&& f) {
  const auto gl = gauss_legendre(80, 0.0, R);
  const SphereRule sr = sphere_product_rule(40, 80);
  std::decay_t<decltype(f(x, 1.0, x))> acc = f(x, 1.0, x) * 0.0;
  for (std::size_t a = 0; a < gl.nodes.size(); ++a)
    for (std::size_t b = 0; b < sr.directions.size(); ++b)
      acc += gl.weights[a] * sr.weights[b] * f(x + gl.nodes[a] * sr.directions[b], gl.nodes[a], sr.directions[b]);
  return acc;
}

Mat3 rotation(const Vec3& axis, double angle) { return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix(); }

}  // namespace

TEST_CASE("Gaussian source potentials") {
  const SourceField point = SourceField::gaussian(Vec3::Zero(), 1e-3);
  CHECK(std::abs(point.potential(Vec3(1, 0, 0)) - 1.0 / (4.0 * kPi)) <= 1e-6);

  const double s = 0.2;
  const SourceField g = SourceField::gaussian(Vec3(0.1, 0, 0), s);
  CHECK(g.potential(Vec3(0.1, 0, 0)) == doctest::Approx(std::sqrt(2.0 / kPi) / s / (4.0 * kPi)).epsilon(1e-14));
  for (const Vec3& x : {Vec3(0.1, 0, 0), Vec3(0.3, -0.1, 0.05), Vec3(0.1 + 1e-5, 0, 0), Vec3(1, 1, 0)}) {
    // 1/(4 pi t) t^2 = t / (4 pi)
    const double R = (x - Vec3(0.1, 0, 0)).norm() + 12.0 * s;
    const double ref = spherical_quad(x, R, [&](const Vec3& y, double t, const Vec3&) { return g(y) * t / (4.0 * kPi); });
    CHECK(std::abs(g.potential(x) - ref) <= 1e-6 * std::abs(ref));
    // gradient by central differences
    const double h = 1e-5;
    for (int k = 0; k < 3; ++k) {
      const double fd = (g.potential(x + h * Vec3::Unit(k)) - g.potential(x - h * Vec3::Unit(k))) / (2.0 * h);
      CHECK(std::abs(fd - g.potential_gradient(x)[k]) <= 1e-7);
    }
  }

  const Vec3 f(0.3, -1.0, 0.5);
  const SourceField gs = SourceField::gaussian_force(Vec3::Zero(), s, f);
  for (const Vec3& x : {Vec3(0, 0, 0), Vec3(1e-6, 0, 0), Vec3(0.15, 0.1, -0.2), Vec3(0.5, 0.0, 0.3)}) {
    const double R = x.norm() + 12.0 * s;
    const Vec3 ref = spherical_quad(x, R, [&](const Vec3& y, double t, const Vec3& w) -> Vec3 {
      // G_St(t w) t^2 = t (I + w w^T) / (8 pi)
      return t * (f + w * w.dot(f)) / (8.0 * kPi) * (std::pow(2.0 * kPi * s * s, -1.5) * std::exp(-y.squaredNorm() / (2.0 * s * s)));
    });
    CHECK((gs.stokes_potential(x) - ref).norm() <= 1e-8 * ref.norm());
  }
  const Vec3 far(2.0 * std::sqrt(0.5), 0.0, 2.0 * std::sqrt(0.5));  // |x| = 10 s
  // beyond the bump: G_St f + (s^2 / 2) Laplacian(G_St) f, the Laplacian by central differences
  Vec3 lap = Vec3::Zero();
  const double hl = 1e-3;
  for (int k = 0; k < 3; ++k)
    lap += (kern::stokeslet(far + hl * Vec3::Unit(k)) + kern::stokeslet(far - hl * Vec3::Unit(k)) - 2.0 * kern::stokeslet(far)) * f / (hl * hl);
  const Vec3 moment = kern::stokeslet(far) * f + 0.5 * s * s * lap;
  CHECK((gs.stokes_potential(far) - moment).norm() <= 1e-6 * moment.norm());
  const Vec3 farther = 1.2 * far;
  CHECK((gs.stokes_potential(farther) - kern::stokeslet(farther) * f).norm() <= 0.01 * (kern::stokeslet(farther) * f).norm());
  // divergence-free by central differences
  const double h = 1e-5;
  const Vec3 y(0.12, -0.07, 0.2);
  double div = 0.0;
  for (int k = 0; k < 3; ++k)
    div += (gs.stokes_potential(y + h * Vec3::Unit(k))[k] - gs.stokes_potential(y - h * Vec3::Unit(k))[k]) / (2.0 * h);
  CHECK(std::abs(div) <= 1e-7);
}

TEST_CASE("single sphere capacity, drag and polarizability") {
  const double r = 0.05;
  const Domain dom = Domain::ball(Vec3::Zero(), 1.0);
  const Configuration one = explicit_config({Vec3(0.2, 0.1, -0.1)}, r, dom);
  const SourceField g = SourceField::gaussian(Vec3(-0.2, 0, 0), 0.3);
  const Background bg = Background::of(g);
  const MicroSolution s = solve_dirichlet_laplace(one, bg);
  const double u0 = bg.value(one.centers[0]);
  CHECK(std::abs(s.charges[0] + 4.0 * kPi * r * u0) <= 1e-12 * std::abs(4.0 * kPi * r * u0));
  const ResidualReport rl = boundary_residual(s);
  const double grad = bg.gradient(one.centers[0]).norm();
  CHECK(rl.max > 0.0);
  CHECK(rl.max <= 2.0 * grad * r);

  const Vec3 U(0.3, -0.2, 1.0);
  const MicroSolution st = solve_dirichlet_stokes(one, Background::velocity(U));
  CHECK((st.vectors[0] + 6.0 * kPi * r * U).norm() <= 1e-12 * 6.0 * kPi * r * U.norm());
  CHECK(boundary_residual(st).max <= 1e-10 * U.norm());

  const Vec3 E(0.0, 1.0, 2.0);
  const MicroSolution c = solve_conductor(one, Background::affine(0.5, E));
  CHECK((c.vectors[0] - 4.0 * kPi * r * r * r * E).norm() <= 1e-12 * 4.0 * kPi * r * r * r * E.norm());
  // exterior perturbation vanishes the field variation on the sphere
  const ResidualReport rc = boundary_residual(c);
  CHECK(rc.max <= 1e-12);
  CHECK(rc.max_flux_defect <= 1e-12);
}

TEST_CASE("zero source gives zero strengths") {
  const Configuration p = generate_periodic(3, Domain::unit_cube());
  const Background zero = Background::of(SourceField());
  for (Problem pr : {Problem::DirichletLaplace, Problem::DirichletStokes}) {
    const MicroSolution s = solve_micro(pr, p, zero);
    for (double q : s.charges) CHECK(q == 0.0);
    for (const Vec3& f : s.vectors) CHECK(f.norm() == 0.0);
  }
  const Configuration f = generate_periodic(3, Domain::unit_cube(), Scaling::fraction(0.02));
  const MicroSolution c = solve_conductor(f, Background::affine(1.0, Vec3::Zero()));
  for (const Vec3& v : c.vectors) CHECK(v.norm() == 0.0);
  MicroOptions refl;
  refl.method = MicroMethod::Reflections;
  CHECK(solve_dirichlet_laplace(p, zero, refl).charges[0] == 0.0);
}

TEST_CASE("two spheres") {
  const double r = 0.1;
  const Domain dom = Domain::ball(Vec3::Zero(), 2.0);
  const Configuration pair = explicit_config({Vec3(-0.3, 0, 0), Vec3(0.3, 0, 0)}, r, dom);
  const SourceField g = SourceField::gaussian(Vec3::Zero(), 0.2);
  const MicroSolution s = solve_dirichlet_laplace(pair, Background::of(g));
  CHECK(s.charges[0] == doctest::Approx(s.charges[1]).epsilon(1e-14));
  const double single = 4.0 * kPi * r * g.potential(pair.centers[0]);
  CHECK(std::abs(s.charges[0]) < single);

  const Configuration far = explicit_config({Vec3(-5.0, 0, 0), Vec3(5.0, 0, 0)}, r, Domain::ball(Vec3::Zero(), 6.0));
  const Vec3 U(1, 2, 3);
  const MicroSolution st = solve_dirichlet_stokes(far, Background::velocity(U));
  for (const Vec3& f : st.vectors) CHECK((f + 6.0 * kPi * r * U).norm() <= 0.05 * 6.0 * kPi * r * U.norm());

  const double iso = 4.0 * kPi * r * r * r;
  const Vec3 ex = Vec3::UnitX(), ey = Vec3::UnitY();
  const MicroSolution along = solve_conductor(pair, Background::affine(0.0, ex));
  const MicroSolution across = solve_conductor(pair, Background::affine(0.0, ey));
  // 2 x 2 block solve: p = iso E / (1 - iso k), k = 2/(4 pi d^3) along, -1/(4 pi d^3) across
  const double d = 0.6;
  CHECK(along.vectors[0][0] == doctest::Approx(iso / (1.0 - iso * 2.0 / (4.0 * kPi * d * d * d))).epsilon(1e-12));
  CHECK(across.vectors[0][1] == doctest::Approx(iso / (1.0 + iso / (4.0 * kPi * d * d * d))).epsilon(1e-12));
  CHECK(along.vectors[0].norm() > iso);
  CHECK(across.vectors[0].norm() < iso);
}

TEST_CASE("linearity and rotation equivariance") {
  const Density ball = Density::uniform_ball(Vec3::Zero(), 1.0);
  const Configuration c = generate_hardcore(60, ball, 1.0, 3, Scaling::power(1.3));
  const SourceField g1 = SourceField::gaussian(Vec3(0.2, 0, 0), 0.3, 2.0);
  const SourceField g2 = SourceField::gaussian(Vec3(-0.1, 0.3, 0), 0.2, -0.5);
  const auto q1 = solve_dirichlet_laplace(c, Background::of(g1)).charges;
  const auto q2 = solve_dirichlet_laplace(c, Background::of(g2)).charges;
  const auto q12 = solve_dirichlet_laplace(c, Background::of(g1 + g2)).charges;
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(std::abs(q12[i] - q1[i] - q2[i]) <= 1e-10 * std::abs(q12[i]) + 1e-15);

  const SourceField f1 = SourceField::gaussian_force(Vec3(0.1, 0.1, 0), 0.3, Vec3(1, 0, 0));
  const SourceField f2 = SourceField::gaussian_force(Vec3(0, -0.2, 0.1), 0.25, Vec3(0, 0.5, -1));
  const auto a = solve_dirichlet_stokes(c, Background::of(f1)).vectors;
  const auto b = solve_dirichlet_stokes(c, Background::of(f2)).vectors;
  const auto ab = solve_dirichlet_stokes(c, Background::of(f1 + f2)).vectors;
  for (std::size_t i = 0; i < c.size(); ++i) CHECK((ab[i] - a[i] - b[i]).norm() <= 1e-10 * ab[i].norm());

  const Mat3 R = rotation(Vec3(1, 2, 0.5), 0.7);
  Configuration rc = c;
  for (auto& x : rc.centers) x = R * x;
  const auto fr = solve_dirichlet_stokes(rc, Background::of((f1 + f2).transformed(R, Vec3::Zero()))).vectors;
  for (std::size_t i = 0; i < c.size(); ++i) CHECK((fr[i] - R * ab[i]).norm() <= 1e-10 * ab[i].norm());

  Configuration cf = c;
  const auto pc = solve_conductor(cf, Background::of(g1)).vectors;
  const auto pr = solve_conductor(rc, Background::of(g1.transformed(R, Vec3::Zero()))).vectors;
  for (std::size_t i = 0; i < c.size(); ++i) CHECK((pr[i] - R * pc[i]).norm() <= 1e-10 * pc[i].norm());
}

TEST_CASE("reflections agree with the direct solve or report divergence") {
  const Configuration p = generate_periodic(7, Domain::unit_cube());
  const Background bg = Background::of(SourceField::gaussian(Vec3(0.5, 0.5, 0.5), 0.2));
  MicroOptions refl;
  refl.method = MicroMethod::Reflections;
  const Background force = Background::of(SourceField::gaussian_force(Vec3(0.5, 0.5, 0.5), 0.2, Vec3(1, 0, 1)));
  for (Problem pr : {Problem::DirichletLaplace, Problem::DirichletStokes}) {
    const Background& b = pr == Problem::DirichletLaplace ? bg : force;
    const MicroSolution d = solve_micro(pr, p, b);
    const MicroSolution r = solve_micro(pr, p, b, refl);
    CHECK(d.diagnostics.residual <= 1e-10);
    CHECK(r.diagnostics.method == "reflections");
    CHECK(r.diagnostics.iterations > 1);
    CHECK(r.diagnostics.residual <= 1e-6);
    double err = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (pr == Problem::DirichletLaplace) {
        err = std::max(err, std::abs(d.charges[i] - r.charges[i]));
        scale = std::max(scale, std::abs(d.charges[i]));
      } else {
        err = std::max(err, (d.vectors[i] - r.vectors[i]).norm());
        scale = std::max(scale, d.vectors[i].norm());
      }
    }
    CHECK(err <= 1e-6 * scale);
  }
  const Configuration f = generate_periodic(5, Domain::unit_cube(), Scaling::fraction(0.05));
  const Background lin = Background::affine(0.0, Vec3(1, 0, 0));
  const MicroSolution cd = solve_conductor(f, lin);
  const MicroSolution cr = solve_conductor(f, lin, refl);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK((cd.vectors[i] - cr.vectors[i]).norm() <= 1e-6 * cd.vectors[i].norm());

  MicroOptions wild = refl;
  wild.omega = 1.9;
  try {
    solve_dirichlet_laplace(p, bg, wild);
    FAIL("expected divergence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotConverged);
    CHECK(std::string(e.what()).find("diverged") != std::string::npos);
  }
  MicroOptions short_run = refl;
  short_run.max_sweeps = 3;
  CHECK_THROWS_AS(solve_dirichlet_laplace(p, bg, short_run), Error);
}

TEST_CASE("contact handling") {
  const Domain dom = Domain::ball(Vec3::Zero(), 1.0);
  const Background bg = Background::affine(1.0, Vec3::Zero());
  const Configuration close = explicit_config({Vec3(-0.1025, 0, 0), Vec3(0.1025, 0, 0)}, 0.1, dom);
  const MicroSolution s = solve_dirichlet_laplace(close, bg);
  REQUIRE(s.diagnostics.warnings.size() == 1);
  CHECK(s.diagnostics.warnings[0].find("near contact") != std::string::npos);
  CHECK(s.diagnostics.min_gap == doctest::Approx(0.05));
  CHECK(solve_dirichlet_stokes(close, Background::velocity(Vec3::UnitZ())).diagnostics.warnings.size() == 1);

  const Configuration overlap = explicit_config({Vec3(-0.05, 0, 0), Vec3(0.05, 0, 0)}, 0.1, dom);
  try {
    solve_dirichlet_laplace(overlap, bg);
    FAIL("expected an overlap error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Singular);
    CHECK(std::string(e.what()).find("balls 0 and 1") != std::string::npos);
  }
}

TEST_CASE("mobility matrix stays positive definite") {
  const Density cube = Density::uniform_box(Vec3::Zero(), Vec3::Ones());
  for (std::uint64_t seed : {1, 2, 3}) {
    const Configuration c = generate_hardcore(200, cube, 0.5, seed);
    const Background bg = Background::of(SourceField::gaussian_force(Vec3(0.5, 0.5, 0.5), 0.3, Vec3(0, 0, 1)));
    CHECK_NOTHROW(solve_dirichlet_stokes(c, bg));
    MicroOptions pure;
    pure.pure_stokeslet = true;
    const MicroSolution s = solve_dirichlet_stokes(c, bg, pure);
    CHECK(s.pure_stokeslet);
    CHECK(s.diagnostics.residual <= 1e-10);
  }
}

TEST_CASE("boundary residual shrinks with dilution") {
  const Background bg = Background::of(SourceField::gaussian(Vec3(0.5, 0.5, 0.5), 0.3));
  double prev = 1e300;
  for (int m : {3, 5, 7}) {
    const Configuration c = generate_periodic(m, Domain::unit_cube());
    const ResidualReport r = boundary_residual(solve_dirichlet_laplace(c, bg));
    CHECK(r.per_ball.size() == c.size());
    CHECK(r.max < prev);
    prev = r.max;
  }
  const Configuration f = generate_periodic(4, Domain::unit_cube(), Scaling::fraction(0.02));
  const ResidualReport rc = boundary_residual(solve_conductor(f, bg));
  REQUIRE(rc.flux_defect.size() == f.size());
  CHECK(rc.max_flux_defect <= 1e-6 * bg.source.total_mass());
}

TEST_CASE("explicit correctors") {
  const Density rho = Density::uniform_box(Vec3::Zero(), Vec3::Ones());
  const Configuration p = generate_periodic(5, Domain::unit_cube());
  const double n = 125.0;
  // inside B_i the truncated kernel is the constant cap
  const Vec3 x = p.centers[7] + Vec3(0.3, -0.2, 0.1) * p.radius;
  double s = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j)
    if (j != 7) s += 4.0 * kPi * kern::laplace(x - p.centers[j]) / n;
  CHECK(corrector_phi1(p, &rho, x) == doctest::Approx(1.0 + s - 4.0 * kPi * rho.potential(x)).epsilon(1e-12));

  const Configuration one = explicit_config({Vec3(0.5, 0.5, 0.5)}, 0.01, Domain::unit_cube());
  const Vec3 y(0.8, 0.4, 0.5);
  CHECK(corrector_phi1(one, nullptr, y) == doctest::Approx(0.01 / (y - one.centers[0]).norm()).epsilon(1e-14));
  CHECK(corrector_phi1(one, nullptr, one.centers[0]) == doctest::Approx(1.0));
  // Stokes cap 6 pi I/(6 pi) = I; outside equals the exact single-sphere mobility kernel
  CHECK(corrector_phi1_stokes(one, nullptr, one.centers[0]).isApprox(Mat3::Identity()));
  const Mat3 out = 6.0 * kPi * 0.01 * (kern::stokeslet(y - one.centers[0]) + 1e-4 * kern::degenerate(y - one.centers[0]));
  CHECK((corrector_phi1_stokes(one, nullptr, y) - out).norm() <= 1e-12);

  TestField lin;
  lin.direction = Vec3(0, 0, 1);
  const Vec3 z = one.centers[0] + Vec3(0, 0, 0.02);
  CHECK(corrector_phi1_conductor(one, nullptr, lin, z) ==
        doctest::Approx(-4.0 * kPi * 0.01 * lin.direction.dot(kern::dipole_truncated(Vec3(0, 0, 2.0)))).epsilon(1e-14));

  // pairing with a smooth bump: 4 pi [(1/n) sum (G*psi)(x_i) - int rho G*psi] + O(r^3 n)
  const SourceField psi = SourceField::gaussian(Vec3(0.45, 0.5, 0.55), 0.15);
  const double ref = rho.integrate([&](const Vec3& q) { return psi.potential(q); }, 24);
  double prev = 1e300;
  for (int m : {4, 6, 8, 11}) {
    const Configuration c = generate_periodic(m, Domain::unit_cube());
    double acc = 0.0;
    for (const auto& xi : c.centers) acc += psi.potential(xi);
    const double pairing = std::abs(4.0 * kPi * (acc / static_cast<double>(c.size()) - ref));
    CHECK(pairing < prev);
    prev = pairing;
  }

  // conductor corrector: the density term cancels the far field of the dipole sum
  const Configuration f = generate_periodic(6, Domain::unit_cube(), Scaling::fraction(0.01));
  TestField quad;
  quad.kind = TestField::Kind::Quadratic;
  quad.axis = 0;
  quad.center = Vec3(0.5, 0.5, 0.5);
  const Vec3 probe(1.6, 0.4, 0.3);
  const double with_rho = corrector_phi1_conductor(f, &rho, quad, probe);
  const double without = corrector_phi1_conductor(f, nullptr, quad, probe);
  CHECK(std::abs(with_rho) < 0.05 * std::abs(without));
}

TEST_CASE("problem names") {
  for (Problem p : {Problem::DirichletLaplace, Problem::DirichletStokes, Problem::Conductor})
    CHECK(problem_from_name(problem_name(p)) == p);
  CHECK(problem_from_name("brinkman") == Problem::DirichletStokes);
  CHECK_THROWS_AS(problem_from_name("heat"), Error);
}
