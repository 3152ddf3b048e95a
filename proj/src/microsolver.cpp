#include "effmed/microsolver.hpp"

#include "effmed/quadrature.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <sstream>

namespace effmed {

namespace {

const double kSqrt2 = std::sqrt(2.0);
const double kSqrtPi = std::sqrt(kPi);

/// Radial functions of a unit-mass Gaussian of width s at distance r:
/// phi = int rho/|x - y|, dphi = phi'/r, b1 = B'/r, b2 = B'' where
/// B = int |x - y| rho(y) dy.
struct GaussRadial {
  double phi, dphi, b1, b2;
};

GaussRadial gauss_radial(double r, double s) {
  GaussRadial g;
  if (r < 1e-3 * s) {
    const double a = kSqrt2 / (kSqrtPi * s);
    const double r2s = r * r / (s * s);
    g.phi = a * (1.0 - r2s / 6.0);
    g.dphi = -a / (3.0 * s * s);
    g.b1 = a * (2.0 / 3.0 - r2s / 15.0);
    g.b2 = a * (2.0 / 3.0 - r2s / 5.0);
    return g;
  }
  const double t = r / (kSqrt2 * s);
  const double erf = std::erf(t);
  const double ex = std::exp(-t * t);
  g.phi = erf / r;
  g.dphi = (kSqrt2 / (kSqrtPi * s) * ex / r - erf / (r * r)) / r;
  g.b1 = (erf + kSqrt2 * s * ex / (kSqrtPi * r) - s * s * erf / (r * r)) / r;
  g.b2 = -2.0 * kSqrt2 * s * ex / (kSqrtPi * r * r) + 2.0 * s * s * erf / (r * r * r);
  return g;
}

}  // namespace

SourceField::SourceField(std::vector<GaussianBump> bumps) : bumps_(std::move(bumps)) {
  for (const auto& b : bumps_) require(b.width > 0.0, "Gaussian width must be positive");
}

SourceField SourceField::gaussian(const Vec3& center, double width, double mass) {
  return SourceField({GaussianBump{center, width, mass, Vec3::Zero()}});
}

SourceField SourceField::gaussian_force(const Vec3& center, double width, const Vec3& force) {
  return SourceField({GaussianBump{center, width, 0.0, force}});
}

double SourceField::operator()(const Vec3& x) const {
  double v = 0.0;
  for (const auto& b : bumps_) {
    const double s2 = b.width * b.width;
    v += b.mass * std::pow(2.0 * kPi * s2, -1.5) * std::exp(-(x - b.center).squaredNorm() / (2.0 * s2));
  }
  return v;
}

Vec3 SourceField::vector_value(const Vec3& x) const {
  Vec3 v = Vec3::Zero();
  for (const auto& b : bumps_) {
    const double s2 = b.width * b.width;
    v += b.force * std::pow(2.0 * kPi * s2, -1.5) * std::exp(-(x - b.center).squaredNorm() / (2.0 * s2));
  }
  return v;
}

double SourceField::total_mass() const {
  double m = 0.0;
  for (const auto& b : bumps_) m += b.mass;
  return m;
}

Vec3 SourceField::total_force() const {
  Vec3 f = Vec3::Zero();
  for (const auto& b : bumps_) f += b.force;
  return f;
}

double SourceField::potential(const Vec3& x) const {
  double v = 0.0;
  for (const auto& b : bumps_) v += b.mass * gauss_radial((x - b.center).norm(), b.width).phi;
  return v / (4.0 * kPi);
}

Vec3 SourceField::potential_gradient(const Vec3& x) const {
  Vec3 v = Vec3::Zero();
  for (const auto& b : bumps_) {
    const Vec3 d = x - b.center;
    v += b.mass * gauss_radial(d.norm(), b.width).dphi * d;
  }
  return v / (4.0 * kPi);
}

Vec3 SourceField::stokes_potential(const Vec3& x) const {
  // (G_St * rho) f = (2 phi f - grad grad B f) / (8 pi)
  Vec3 v = Vec3::Zero();
  for (const auto& b : bumps_) {
    const Vec3 d = x - b.center;
    const double r = d.norm();
    const GaussRadial g = gauss_radial(r, b.width);
    Vec3 hb = g.b1 * b.force;
    if (r > 0.0) {
      const Vec3 e = d / r;
      hb += (g.b2 - g.b1) * e.dot(b.force) * e;
    }
    v += 2.0 * g.phi * b.force - hb;
  }
  return v / (8.0 * kPi);
}

SourceField SourceField::transformed(const Mat3& rotation, const Vec3& shift) const {
  std::vector<GaussianBump> out = bumps_;
  for (auto& b : out) {
    b.center = rotation * b.center + shift;
    b.force = rotation * b.force;
  }
  return SourceField(std::move(out));
}

SourceField SourceField::scaled(double factor) const {
  std::vector<GaussianBump> out = bumps_;
  for (auto& b : out) {
    b.mass *= factor;
    b.force *= factor;
  }
  return SourceField(std::move(out));
}

SourceField SourceField::operator+(const SourceField& other) const {
  std::vector<GaussianBump> out = bumps_;
  out.insert(out.end(), other.bumps_.begin(), other.bumps_.end());
  return SourceField(std::move(out));
}

Background Background::of(SourceField g) {
  Background b;
  b.kind = Kind::Source;
  b.source = std::move(g);
  return b;
}

Background Background::affine(double u0, const Vec3& gradient) {
  Background b;
  b.kind = Kind::Affine;
  b.u0 = u0;
  b.e = gradient;
  return b;
}

Background Background::velocity(const Vec3& u) { return affine(0.0, u); }

double Background::value(const Vec3& x) const {
  return kind == Kind::Source ? source.potential(x) : u0 + e.dot(x);
}

Vec3 Background::gradient(const Vec3& x) const {
  return kind == Kind::Source ? source.potential_gradient(x) : e;
}

Vec3 Background::velocity_at(const Vec3& x) const {
  return kind == Kind::Source ? source.stokes_potential(x) : e;
}

double Background::source_integral(const Vec3& c, double r) const {
  if (kind != Kind::Source || source.empty()) return 0.0;
  static const BallCubature cub = BallCubature::of_degree(15);
  return cub.integrate(c, r, [&](const Vec3& x) { return source(x); });
}

std::string problem_name(Problem p) {
  switch (p) {
    case Problem::DirichletLaplace: return "dirichlet-laplace";
    case Problem::DirichletStokes: return "dirichlet-stokes";
    case Problem::Conductor: return "conductor";
  }
  return "unknown";
}

Problem problem_from_name(const std::string& name) {
  if (name == "dirichlet-laplace" || name == "strange") return Problem::DirichletLaplace;
  if (name == "dirichlet-stokes" || name == "brinkman") return Problem::DirichletStokes;
  if (name == "conductor" || name == "permittivity") return Problem::Conductor;
  fail(ErrorCode::InvalidArgument, "unknown problem '" + name + "'");
}

namespace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Disjointness check and near-contact scan; returns min gap in units of r.
double contact_scan(const Configuration& c, MicroDiagnostics& diag) {
  if (c.size() < 2) return std::numeric_limits<double>::infinity();
  const auto [i, j] = closest_pair(c.centers);
  const double d = (c.centers[i] - c.centers[j]).norm();
  const double gap = (d - 2.0 * c.radius) / c.radius;
  if (gap <= 0.0) {
    std::ostringstream os;
    os << "balls " << i << " and " << j << " overlap (distance " << d << ", radius " << c.radius << ")";
    fail(ErrorCode::Singular, os.str());
  }
  if (gap < 0.1) {
    std::ostringstream os;
    os << "near contact: balls " << i << " and " << j << " have gap " << gap
       << " r; collocation accuracy is not certified";
    diag.warnings.push_back(os.str());
  }
  return gap;
}

[[noreturn]] void singular_error(const Configuration& c, const std::string& what) {
  std::ostringstream os;
  os << what;
  if (c.size() >= 2) {
    const auto [i, j] = closest_pair(c.centers);
    os << "; closest pair: balls " << i << " and " << j << " at distance " << (c.centers[i] - c.centers[j]).norm()
       << " (radius " << c.radius << ")";
  }
  fail(ErrorCode::Singular, os.str());
}

double relative_residual(const Matrix& a, const Vector& x, const Vector& b) {
  const double nb = b.norm();
  const double nr = (a * x - b).norm();
  return nb > 0.0 ? nr / nb : nr;
}

/// Dense SPD solve or damped Jacobi (method of reflections) on a = D + O
/// with D = d I.
Vector solve_system(const Matrix& a, const Vector& b, double d, const Configuration& c, const MicroOptions& opt,
                    MicroDiagnostics& diag) {
  if (b.size() == 0) return b;
  if (opt.method == MicroMethod::Direct) {
    diag.method = "direct";
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success) singular_error(c, "collocation matrix is not positive definite");
    Vector x = llt.solve(b);
    diag.iterations = 1;
    diag.residual = relative_residual(a, x, b);
    if (!x.allFinite()) singular_error(c, "collocation solve produced non-finite strengths");
    return x;
  }
  diag.method = "reflections";
  require(opt.omega > 0.0 && opt.omega < 2.0, "reflections damping must lie in (0, 2)");
  require(opt.max_sweeps >= 1, "reflections need at least one sweep");
  Vector x = b / d;
  if (b.norm() == 0.0) {
    diag.residual = 0.0;
    return x;
  }
  double first = -1.0, prev = -1.0;
  int growing = 0;
  for (int k = 1; k <= opt.max_sweeps; ++k) {
    const Vector off = a * x - d * x;
    const Vector next = (1.0 - opt.omega) * x + opt.omega * (b - off) / d;
    const double upd = (next - x).norm() / std::max(next.norm(), 1e-300);
    x = next;
    diag.iterations = k;
    if (!std::isfinite(upd) || !x.allFinite()) {
      diag.residual = std::numeric_limits<double>::infinity();
      fail(ErrorCode::NotConverged, "reflections diverged after " + std::to_string(k) + " sweeps (non-finite strengths)");
    }
    if (first < 0.0) first = upd;
    growing = upd > prev && prev >= 0.0 ? growing + 1 : 0;
    prev = upd;
    if (upd <= opt.tol) {
      diag.residual = relative_residual(a, x, b);
      return x;
    }
    if (growing >= 20 && upd > first) {
      diag.residual = relative_residual(a, x, b);
      std::ostringstream os;
      os << "reflections diverged after " << k << " sweeps (relative update " << upd << ", linear residual "
         << diag.residual << ")";
      fail(ErrorCode::NotConverged, os.str());
    }
  }
  diag.residual = relative_residual(a, x, b);
  std::ostringstream os;
  os << "reflections did not converge in " << opt.max_sweeps << " sweeps (relative update " << prev
     << ", linear residual " << diag.residual << ")";
  fail(ErrorCode::NotConverged, os.str());
}

}  // namespace

MicroSolution solve_dirichlet_laplace(const Configuration& config, const Background& bg, const MicroOptions& opt) {
  MicroSolution sol;
  sol.problem = Problem::DirichletLaplace;
  sol.config = config;
  sol.background = bg;
  sol.diagnostics.min_gap = contact_scan(config, sol.diagnostics);
  const std::size_t n = config.size();
  const auto& x = config.centers;
  const double diag = 1.0 / (4.0 * kPi * config.radius);
  Matrix a(n, n);
  Vector b(n);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a(i, j) = i == j ? diag : kern::laplace(x[i] - x[j]);
    b[i] = -bg.value(x[i]);
  }
  const Vector q = solve_system(a, b, diag, config, opt, sol.diagnostics);
  sol.charges.assign(q.data(), q.data() + n);
  return sol;
}

MicroSolution solve_dirichlet_stokes(const Configuration& config, const Background& bg, const MicroOptions& opt) {
  MicroSolution sol;
  sol.problem = Problem::DirichletStokes;
  sol.config = config;
  sol.background = bg;
  sol.pure_stokeslet = opt.pure_stokeslet;
  sol.diagnostics.min_gap = contact_scan(config, sol.diagnostics);
  const std::size_t n = config.size();
  const auto& x = config.centers;
  const double r2 = config.radius * config.radius;
  const double diag = 1.0 / (6.0 * kPi * config.radius);
  Matrix a(3 * n, 3 * n);
  Vector b(3 * n);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      Mat3 m;
      if (i == j) {
        m = diag * Mat3::Identity();
      } else {
        const Vec3 d = x[i] - x[j];
        m = kern::stokeslet(d);
        if (!opt.pure_stokeslet) m += r2 * kern::degenerate(d);
      }
      a.block<3, 3>(3 * i, 3 * j) = m;
    }
    b.segment<3>(3 * i) = -bg.velocity_at(x[i]);
  }
  const Vector f = solve_system(a, b, diag, config, opt, sol.diagnostics);
  sol.vectors.resize(n);
  for (std::size_t i = 0; i < n; ++i) sol.vectors[i] = f.segment<3>(3 * i);
  return sol;
}

MicroSolution solve_conductor(const Configuration& config, const Background& bg, const MicroOptions& opt) {
  MicroSolution sol;
  sol.problem = Problem::Conductor;
  sol.config = config;
  sol.background = bg;
  sol.diagnostics.min_gap = contact_scan(config, sol.diagnostics);
  const std::size_t n = config.size();
  const auto& x = config.centers;
  const double r = config.radius;
  // p_i / (4 pi r^3) - sum_{j != i} grad V(x_i - x_j) p_j = grad u_bg(x_i)
  const double diag = 1.0 / (4.0 * kPi * r * r * r);
  Matrix a(3 * n, 3 * n);
  Vector b(3 * n);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      a.block<3, 3>(3 * i, 3 * j) = i == j ? Mat3(diag * Mat3::Identity()) : Mat3(-kern::laplace_hess(x[i] - x[j]));
    b.segment<3>(3 * i) = bg.gradient(x[i]);
  }
  const Vector p = solve_system(a, b, diag, config, opt, sol.diagnostics);
  sol.vectors.resize(n);
  for (std::size_t i = 0; i < n; ++i) sol.vectors[i] = p.segment<3>(3 * i);
  return sol;
}

MicroSolution solve_micro(Problem p, const Configuration& config, const Background& bg, const MicroOptions& opt) {
  switch (p) {
    case Problem::DirichletLaplace: return solve_dirichlet_laplace(config, bg, opt);
    case Problem::DirichletStokes: return solve_dirichlet_stokes(config, bg, opt);
    case Problem::Conductor: return solve_conductor(config, bg, opt);
  }
  fail(ErrorCode::Internal, "unhandled problem kind");
}

std::vector<double> MicroSolution::evaluate(const std::vector<Vec3>& points, const SumOptions& sum) const {
  std::vector<double> out(points.size());
  SumOptions so = sum;
  so.exclude_self = false;
  so.exclude.clear();
  if (problem == Problem::DirichletLaplace) {
    const auto s = kernel_sum(LaplaceK{}, points, config.centers, charges, so);
    for (std::size_t k = 0; k < points.size(); ++k) out[k] = background.value(points[k]) + s[k];
  } else if (problem == Problem::Conductor) {
    const auto s = kernel_sum(LaplaceGradK{}, points, config.centers, vectors, so);
    for (std::size_t k = 0; k < points.size(); ++k) out[k] = background.value(points[k]) + s[k];
  } else {
    fail(ErrorCode::InvalidArgument, "scalar evaluation of a Stokes solution; use evaluate_velocity");
  }
  return out;
}

std::vector<Vec3> MicroSolution::evaluate_velocity(const std::vector<Vec3>& points, const SumOptions& sum) const {
  require(problem == Problem::DirichletStokes, "velocity evaluation needs a Stokes solution");
  SumOptions so = sum;
  so.exclude_self = false;
  so.exclude.clear();
  auto out = kernel_sum(StokesletK{}, points, config.centers, vectors, so);
  if (!pure_stokeslet) {
    std::vector<Vec3> scaled(vectors.size());
    const double r2 = config.radius * config.radius;
    for (std::size_t j = 0; j < vectors.size(); ++j) scaled[j] = r2 * vectors[j];
    const auto d = kernel_sum(DegenerateK{}, points, config.centers, scaled, so);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += d[k];
  }
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += background.velocity_at(points[k]);
  return out;
}

ResidualReport boundary_residual(const MicroSolution& sol) {
  const auto& c = sol.config;
  const std::size_t n = c.size();
  const auto& dirs = sphere_sample26();
  const std::size_t m = dirs.size();
  std::vector<Vec3> pts;
  pts.reserve(n * m);
  for (const auto& x : c.centers)
    for (const auto& d : dirs) pts.push_back(x + c.radius * d);

  ResidualReport rep;
  rep.per_ball.assign(n, 0.0);
  if (sol.problem == Problem::DirichletStokes) {
    const auto u = sol.evaluate_velocity(pts);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < m; ++k) rep.per_ball[i] = std::max(rep.per_ball[i], u[i * m + k].norm());
  } else {
    const auto u = sol.evaluate(pts);
    for (std::size_t i = 0; i < n; ++i) {
      double mean = 0.0;
      if (sol.problem == Problem::Conductor) {
        for (std::size_t k = 0; k < m; ++k) mean += u[i * m + k];
        mean /= static_cast<double>(m);
      }
      for (std::size_t k = 0; k < m; ++k) rep.per_ball[i] = std::max(rep.per_ball[i], std::abs(u[i * m + k] - mean));
    }
  }
  if (sol.problem == Problem::Conductor) {
    // flux of grad u_n through each sphere plus the source mass inside
    const SphereRule rule = sphere_product_rule(8, 16);
    const std::size_t mq = rule.directions.size();
    std::vector<Vec3> fp;
    fp.reserve(n * mq);
    for (const auto& x : c.centers)
      for (const auto& d : rule.directions) fp.push_back(x + c.radius * d);
    const auto grad = kernel_sum(LaplaceHessK{}, fp, c.centers, sol.vectors);
    rep.flux_defect.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double flux = 0.0;
      for (std::size_t k = 0; k < mq; ++k) {
        const Vec3& y = fp[i * mq + k];
        flux += rule.weights[k] * (sol.background.gradient(y) + grad[i * mq + k]).dot(rule.directions[k]);
      }
      flux *= c.radius * c.radius;
      rep.flux_defect[i] = std::abs(flux + sol.background.source_integral(c.centers[i], c.radius));
      rep.max_flux_defect = std::max(rep.max_flux_defect, rep.flux_defect[i]);
    }
  }
  for (double v : rep.per_ball) rep.max = std::max(rep.max, v);
  return rep;
}

double corrector_phi1(const Configuration& config, const Density* rho, const Vec3& x) {
  const double inv_r = 1.0 / config.radius;
  double s = 0.0;
  for (const auto& xi : config.centers) s += kern::laplace_truncated(inv_r * (x - xi));
  return 4.0 * kPi * (s - (rho ? rho->potential(x) : 0.0));
}

Mat3 corrector_phi1_stokes(const Configuration& config, const Density* rho, const Vec3& x) {
  const double inv_r = 1.0 / config.radius;
  Mat3 s = Mat3::Zero();
  for (const auto& xi : config.centers) s += kern::stokes_truncated(inv_r * (x - xi));
  if (rho) s -= rho->stokes_potential(x);
  return 6.0 * kPi * s;
}

double corrector_phi1_conductor(const Configuration& config, const Density* rho, const TestField& phi, const Vec3& x) {
  const double r = config.radius;
  double s = 0.0;
  for (const auto& xi : config.centers) s += phi.grad(xi).dot(kern::dipole_truncated((x - xi) / r));
  double conv = 0.0;
  if (rho) {
    // V * (rho grad phi) = grad(G * rho) . grad phi(x) + int V(x - y) . (grad phi(y) - grad phi(x)) rho(y) dy
    const Vec3 gx = phi.grad(x);
    conv = rho->potential_gradient(x).dot(gx);
    if (phi.kind != TestField::Kind::Linear) {
      conv += rho->integrate(
          [&](const Vec3& y) {
            const Vec3 d = x - y;
            if (d.squaredNorm() == 0.0) return 0.0;
            return kern::laplace_grad(d).dot(phi.grad(y) - gx);
          },
          32);
    }
  }
  const double lambda_k = 4.0 * kPi / 3.0 * static_cast<double>(config.size()) * r * r * r;
  return 3.0 * lambda_k * conv - 4.0 * kPi * r * s;
}

}  // namespace effmed
