#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "effmed/macrosolver.hpp"

#include <cmath>

using namespace effmed;

namespace {

std::vector<Vec3> probe_sphere(const Vec3& c, double radius, int count) {
  // Fibonacci points
  std::vector<Vec3> p;
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / count;
    const double s = std::sqrt(1.0 - z * z);
    p.push_back(c + radius * Vec3(s * std::cos(golden * i), s * std::sin(golden * i), z));
  }
  return p;
}

double rel_rms(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / den);
}

const Density tapered = Density::radial_profile(Vec3::Zero(), {{0.0, 1.0}, {0.6, 1.0}, {1.0, 0.0}});

}  // namespace

TEST_CASE("radial solve without screening is the Newton potential") {
  const SourceField g = SourceField::gaussian(Vec3::Zero(), 0.2);
  const RadialProfile p = solve_strange_radial(Density::uniform_ball(Vec3::Zero(), 1.0), g, 2.0, 4000, 0.0);
  double err = 0.0;
  for (double r : {0.0, 0.1, 0.37, 1.0, 1.9, 2.0, 3.5}) err = std::max(err, std::abs(p.value(r) - g.potential(Vec3(r, 0, 0))));
  CHECK(err <= 1e-6);
  CHECK(p.decay == doctest::Approx(1.0 / (4.0 * kPi)).epsilon(1e-6));
  CHECK_THROWS_AS(solve_strange_radial(Density::uniform_ball(Vec3::Zero(), 1.0), g, 0.5), Error);
  CHECK_THROWS_AS(solve_strange_radial(Density::uniform_box(Vec3::Zero(), Vec3::Ones()), g), Error);
  CHECK_THROWS_AS(solve_strange_radial(tapered, SourceField::gaussian(Vec3(0.1, 0, 0), 0.2)), Error);
}

TEST_CASE("radial screening, positivity and second-order refinement") {
  const Density ball = Density::uniform_ball(Vec3::Zero(), 1.0);
  const SourceField g = SourceField::gaussian(Vec3::Zero(), 0.3);
  const RadialProfile p = solve_strange_radial(ball, g);
  CHECK(p.positive());
  CHECK(p.value(0.0) < g.potential(Vec3::Zero()));
  const RadialProfile p2 = solve_strange_radial(ball, g, 0.0, 4000, 2.0);
  for (double r : {0.0, 0.5, 1.2}) CHECK(p2.value(r) < p.value(r));

  // profile kinks at 0.6 and 1.0 fall on grid nodes
  const SourceField g2 = SourceField::gaussian(Vec3::Zero(), 0.25);
  std::vector<double> u;
  for (int M : {250, 500, 1000, 2000}) u.push_back(solve_strange_radial(tapered, g2, 2.0, M).value(0.0));
  for (int k = 0; k + 2 < 4; ++k) {
    const double order = std::log2(std::abs(u[k] - u[k + 1]) / std::abs(u[k + 1] - u[k + 2]));
    CHECK(order == doctest::Approx(2.0).epsilon(0.15));
  }
}

TEST_CASE("volume potential matches the radial solve") {
  const SourceField g = SourceField::gaussian(Vec3::Zero(), 0.3);
  const RadialProfile p = solve_strange_radial(tapered, g, 3.0, 6000);
  const EffectiveField f = solve_volume_potential(MacroModel::Strange, tapered, g, {.cells = 32});
  CHECK(f.diagnostics.residual <= 1e-10);
  for (double radius : {0.4, 1.3}) {
    const auto pts = probe_sphere(Vec3::Zero(), radius, 200);
    std::vector<double> ref;
    for (const auto& x : pts) ref.push_back(p(x));
    CHECK(rel_rms(f.evaluate(pts), ref) <= 1e-3);
  }
}

TEST_CASE("grid convolution agrees with a direct sum") {
  const Density cube = Density::uniform_box(Vec3::Zero(), Vec3::Ones());
  const SourceField g = SourceField::gaussian(Vec3(0.4, 0.5, 0.6), 0.2);
  const EffectiveField f = solve_volume_potential(MacroModel::Strange, cube, g, {.cells = 12});
  const double h = f.grid.h;
  const double self = box::inverse_distance(Vec3::Zero(), Vec3::Constant(-h / 2), Vec3::Constant(h / 2)) / (4.0 * kPi);
  for (std::size_t p : {std::size_t(0), f.grid.size() / 2, f.grid.size() - 7}) {
    const Vec3 x = f.grid.node(p);
    double s = 0.0;
    for (std::size_t k = 0; k < f.active.size(); ++k) {
      const Vec3 d = x - f.active[k];
      s += f.charge[k] * (d.norm() == 0.0 ? self / (h * h * h) : kern::laplace(d));
    }
    CHECK(f.values[p] == doctest::Approx(g.potential(x) - s).epsilon(1e-9));
  }
  // grid nodes are reproduced, and the representation is continuous at the node box
  CHECK(f.evaluate({f.grid.node(100)})[0] == doctest::Approx(f.values[100]).epsilon(1e-14));
  const std::vector<Vec3> corner = {f.grid.origin, f.grid.last()};
  const auto inner = f.evaluate(corner);
  const auto rep = f.represent(corner);
  for (int i = 0; i < 2; ++i) CHECK(std::abs(inner[i] - rep[i]) <= 2e-10 * std::abs(rep[i]));
}

TEST_CASE("far field carries the effective mass") {
  const Density cube = Density::uniform_box(Vec3::Zero(), Vec3::Ones());
  const SourceField g = SourceField::gaussian(Vec3(0.5, 0.5, 0.5), 0.2, 2.0);
  const EffectiveField f = solve_volume_potential(MacroModel::Strange, cube, g, {.cells = 16});
  const Vec3 x(300.0, -200.0, 100.0);
  const double far = 4.0 * kPi * x.norm() * f.evaluate({x})[0];
  CHECK(std::abs(far - f.effective_mass()) <= 0.01 * std::abs(f.effective_mass()));
  CHECK(f.effective_mass() < g.total_mass());
}

TEST_CASE("no coupling reproduces the background") {
  const Density cube = Density::uniform_box(Vec3::Zero(), Vec3::Ones());
  const SourceField g = SourceField::gaussian(Vec3(0.5, 0.5, 0.5), 0.2);
  const SourceField gf = SourceField::gaussian_force(Vec3(0.5, 0.5, 0.5), 0.2, Vec3(1, 0, 0));
  const std::vector<Vec3> pts = {Vec3(0.5, 0.5, 0.5), Vec3(0.13, 0.7, 0.2), Vec3(2, 0, 0)};
  const EffectiveField s = solve_volume_potential(MacroModel::Strange, cube, g, {.cells = 8, .rho_scale = 0.0});
  const EffectiveField p = solve_volume_potential(MacroModel::Permittivity, cube, g, {.cells = 8, .lambda = 0.0});
  const EffectiveField b = solve_volume_potential(MacroModel::Brinkman, cube, gf, {.cells = 8, .rho_scale = 0.0});
  for (std::size_t n = 0; n < s.grid.size(); n += 37) {
    CHECK(s.values[n] == g.potential(s.grid.node(n)));
    CHECK(p.values[n] == g.potential(p.grid.node(n)));
    CHECK(b.velocities[n] == gf.stokes_potential(b.grid.node(n)));
  }
  CHECK(s.represent(pts)[2] == g.potential(pts[2]));
  CHECK(b.evaluate_velocity(pts)[2] == gf.stokes_potential(pts[2]));
}

TEST_CASE("strange model: positivity and screening monotonicity") {
  const Density cube = Density::uniform_box(Vec3::Zero(), Vec3::Ones());
  const SourceField g = SourceField::gaussian(Vec3(0.3, 0.5, 0.5), 0.15);
  const EffectiveField a = solve_volume_potential(MacroModel::Strange, cube, g, {.cells = 16});
  const EffectiveField b = solve_volume_potential(MacroModel::Strange, cube, g, {.cells = 16, .rho_scale = 2.0});
  for (std::size_t n = 0; n < a.values.size(); ++n) {
    CHECK(a.values[n] >= 0.0);
    CHECK(b.values[n] < a.values[n]);
  }
}

TEST_CASE("self-convergence under grid refinement") {
  const Density cube = Density::uniform_box(Vec3::Zero(), Vec3::Ones());
  const SourceField g = SourceField::gaussian(Vec3(0.5, 0.5, 0.5), 0.2);
  const std::vector<Vec3> probes = {Vec3(0.5, 0.5, 1.3), Vec3(-0.4, 0.5, 0.5), Vec3(1.2, 1.2, 1.2)};
  std::vector<std::vector<double>> v;
  for (int c : {8, 16, 32}) v.push_back(solve_volume_potential(MacroModel::Strange, cube, g, {.cells = c}).evaluate(probes));
  for (std::size_t i = 0; i < probes.size(); ++i)
    CHECK(std::abs(v[0][i] - v[1][i]) >= 3.0 * std::abs(v[1][i] - v[2][i]));
}

TEST_CASE("Brinkman: divergence and the Darcy balance") {
  const Density cube = Density::uniform_box(Vec3::Zero(), Vec3::Ones());
  const SourceField g = SourceField::gaussian_force(Vec3(0.5, 0.5, 0.5), 0.2, Vec3(0, 0, 1));
  const EffectiveField f = solve_volume_potential(MacroModel::Brinkman, cube, g, {.cells = 16});
  CHECK(f.diagnostics.residual <= 1e-10);
  // the representation is exactly solenoidal outside the node box
  const double hd = 1e-4;
  for (const Vec3& x : {Vec3(1.4, 0.5, 0.5), Vec3(-0.3, 1.3, 0.2), Vec3(0.5, 0.5, 2.0)}) {
    double div = 0.0, grad = 0.0;
    for (int a = 0; a < 3; ++a) {
      const auto v = f.represent_velocity({x + hd * Vec3::Unit(a), x - hd * Vec3::Unit(a)});
      const Vec3 d = (v[0] - v[1]) / (2.0 * hd);
      div += d[a];
      grad = std::max(grad, d.cwiseAbs().maxCoeff());
    }
    CHECK(std::abs(div) <= 1e-3 * grad);
  }
  // on the grid the fourth-order difference divergence shrinks under refinement
  double prev = 1e300;
  for (int c : {8, 16, 24}) {
    const EffectiveField fc = solve_volume_potential(MacroModel::Brinkman, tapered, SourceField::gaussian_force(Vec3::Zero(), 0.2, Vec3(0, 0, 1)), {.cells = c});
    const GridInfo& gr = fc.grid;
    auto at = [&](int i, int j, int k, int a, int s) {
      std::array<int, 3> q{i, j, k};
      q[a] += s;
      return fc.velocities[gr.index(q[0], q[1], q[2])][a];
    };
    double div = 0.0, grad = 0.0;
    for (int i = 2; i + 2 < gr.dims[0]; ++i)
      for (int j = 2; j + 2 < gr.dims[1]; ++j)
        for (int k = 2; k + 2 < gr.dims[2]; ++k) {
          double d = 0.0;
          for (int a = 0; a < 3; ++a) {
            const double da = (-at(i, j, k, a, 2) + 8.0 * at(i, j, k, a, 1) - 8.0 * at(i, j, k, a, -1) + at(i, j, k, a, -2)) / (12.0 * gr.h);
            d += da;
            grad = std::max(grad, std::abs(da));
          }
          div = std::max(div, std::abs(d));
        }
    MESSAGE("cells " << c << ": max |div| / max |d_a u_a| = " << div / grad);
    CHECK(div / grad < prev);
    prev = div / grad;
  }
  CHECK(prev <= 5e-3);

  // steep screening: 6 pi s rho u balances the solenoidal part of the forcing,
  // which is 2/3 of an isotropic Gaussian force at its centre
  const double S = 60.0;
  const SourceField local = SourceField::gaussian_force(Vec3(0.5, 0.5, 0.5), 0.15, Vec3(0, 0, 1));
  const EffectiveField d = solve_volume_potential(MacroModel::Brinkman, cube, local, {.cells = 32, .rho_scale = S});
  const double balance = 2.0 / 3.0 * local.vector_value(Vec3(0.5, 0.5, 0.5)).norm() / (6.0 * kPi * S);
  const double centre = d.evaluate_velocity({Vec3(0.5, 0.5, 0.5)})[0].norm();
  MESSAGE("Darcy ratio " << centre / balance);
  CHECK(std::abs(centre / balance - 1.0) <= 0.2);
}

TEST_CASE("permittivity correction is first order in lambda") {
  const Density cube = Density::uniform_box(Vec3::Zero(), Vec3::Ones());
  const SourceField g = SourceField::gaussian(Vec3(0.5, 0.5, 0.5), 0.2);
  const std::vector<Vec3> probes = {Vec3(0.5, 0.5, 1.5), Vec3(0.2, 0.8, 0.5)};
  std::vector<double> lx, ly;
  for (double lambda : {0.005, 0.01, 0.02, 0.04}) {
    const EffectiveField f = solve_volume_potential(MacroModel::Permittivity, cube, g, {.cells = 12, .lambda = lambda});
    const auto u = f.evaluate(probes);
    lx.push_back(std::log(lambda));
    ly.push_back(std::log(std::abs(u[0] - g.potential(probes[0]))));
    CHECK(f.diagnostics.truncation > 0.0);
    CHECK(f.diagnostics.warnings.empty());
  }
  const double slope = (ly.back() - ly.front()) / (lx.back() - lx.front());
  CHECK(slope == doctest::Approx(1.0).epsilon(0.1));
  // the correction lowers the potential of a positive source inside a dielectric
  const EffectiveField f = solve_volume_potential(MacroModel::Permittivity, cube, g, {.cells = 12, .lambda = 0.2});
  CHECK(f.evaluate({Vec3(0.5, 0.5, 0.5)})[0] < g.potential(Vec3(0.5, 0.5, 0.5)));
  CHECK(f.diagnostics.warnings.size() == 1);
  CHECK(f.diagnostics.truncation < f.coupling * std::abs(f.values[0] - g.potential(f.grid.node(0))) * 1e3);
}

TEST_CASE("stalled iteration is reported") {
  const Density cube = Density::uniform_box(Vec3::Zero(), Vec3::Ones());
  const SourceField g = SourceField::gaussian(Vec3(0.5, 0.5, 0.5), 0.2);
  try {
    solve_volume_potential(MacroModel::Strange, cube, g, {.cells = 8, .max_iter = 2});
    FAIL("expected NotConverged");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotConverged);
    CHECK(std::string(e.what()).find("residual history") != std::string::npos);
  }
  CHECK(macro_model_from_name(macro_model_name(MacroModel::Brinkman)) == MacroModel::Brinkman);
  CHECK_THROWS_AS(macro_model_from_name("wave"), Error);
}
