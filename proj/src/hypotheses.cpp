#include "effmed/hypotheses.hpp"

#include "effmed/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace effmed {

namespace {

/// Lexicographically sorted copy; every functional works on this order so
/// that relabeling the centres cannot change a single bit.
std::vector<Vec3> canonical(const std::vector<Vec3>& pts) {
  std::vector<Vec3> out = pts;
  std::sort(out.begin(), out.end(), [](const Vec3& a, const Vec3& b) {
    return std::lexicographical_compare(a.data(), a.data() + 3, b.data(), b.data() + 3);
  });
  return out;
}

double ordered_sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

/// Cubature nodes of every ball, ball by ball, with the owning ball as the
/// excluded source.
struct BallNodes {
  std::vector<Vec3> points;
  std::vector<double> weights;  // scaled to the ball
  std::vector<std::size_t> owner;
  std::size_t per_ball = 0;
};

BallNodes ball_nodes(const std::vector<Vec3>& centers, double radius, int degree) {
  const BallCubature cub = BallCubature::of_degree(degree);
  BallNodes b;
  b.per_ball = cub.size();
  const double scale = radius * radius * radius;
  b.points.reserve(centers.size() * cub.size());
  for (std::size_t i = 0; i < centers.size(); ++i)
    for (std::size_t q = 0; q < cub.size(); ++q) {
      b.points.push_back(centers[i] + radius * cub.nodes()[q]);
      b.weights.push_back(cub.weights()[q] * scale);
      b.owner.push_back(i);
    }
  return b;
}

SumOptions sum_options(const HypothesisOptions& opt, bool tree_capable) {
  SumOptions so;
  so.method = tree_capable ? opt.method : SumMethod::Direct;
  so.theta = opt.theta;
  return so;
}

void require_reflexive(const Configuration& config, const char* what) {
  if (config.scaling.kind != ScalingKind::Reflexive)
    fail(ErrorCode::InvalidArgument, std::string(what) + " is defined for the scaling r_n = 1/n only");
}

Functional assemble(std::vector<std::string> names, const std::vector<std::vector<double>>& per_term) {
  Functional f;
  f.term_names = std::move(names);
  const std::size_t n = per_term.empty() ? 0 : per_term[0].size();
  f.per_ball.assign(n, 0.0);
  for (const auto& t : per_term) {
    f.terms.push_back(ordered_sum(t));
    for (std::size_t i = 0; i < n; ++i) f.per_ball[i] += t[i];
  }
  f.value = ordered_sum(f.terms);
  return f;
}

}  // namespace

H1Result h1_check(const Configuration& config, double c) {
  H1Result r;
  const double n = static_cast<double>(config.size());
  r.c_above_two = c > 2.0;
  if (config.size() < 2) {
    r.d_n = r.h1_margin = r.a1_margin = std::numeric_limits<double>::infinity();
    r.h1_pass = r.a1_pass = true;
    return r;
  }
  r.d_n = min_distance(config.centers);
  r.h1_margin = n * r.d_n;
  r.a1_margin = r.d_n / config.radius;
  r.h1_pass = r.d_n >= c / n;
  r.a1_pass = r.d_n >= c * config.radius;
  return r;
}

Functional h2_value(const Configuration& config, const Density& rho, const HypothesisOptions& opt) {
  require_reflexive(config, "h2");
  const std::size_t n = config.size();
  const double dn = static_cast<double>(n);
  const auto pts = canonical(config.centers);
  const BallNodes b = ball_nodes(pts, config.radius, opt.cubature_degree);
  SumOptions so = sum_options(opt, true);
  so.exclude = b.owner;
  const std::vector<double> ones(n, 1.0);
  const auto g = kernel_sum(LaplaceK{}, b.points, pts, ones, so);
  const auto dg = kernel_sum(LaplaceGradK{}, b.points, pts, ones, so);

  std::vector<std::vector<double>> t(2, std::vector<double>(n, 0.0));
#pragma omp parallel for schedule(dynamic, 8)
  for (std::size_t i = 0; i < n; ++i) {
    double a = 0.0, c = 0.0;
    for (std::size_t q = i * b.per_ball; q < (i + 1) * b.per_ball; ++q) {
      const double e = g[q] / dn - rho.potential(b.points[q]);
      a += b.weights[q] * dn * dn * e * e;
      c += b.weights[q] * dg[q].squaredNorm() / (dn * dn);
    }
    t[0][i] = a;
    t[1][i] = c;
  }
  return assemble({"potential", "gradient"}, t);
}

Functional h2prime_value(const Configuration& config, const Density& rho, const HypothesisOptions& opt) {
  require_reflexive(config, "h2prime");
  const std::size_t n = config.size();
  const double dn = static_cast<double>(n);
  const auto pts = canonical(config.centers);
  const BallNodes b = ball_nodes(pts, config.radius, opt.cubature_degree);
  SumOptions tree = sum_options(opt, true);
  SumOptions direct = sum_options(opt, false);
  tree.exclude = direct.exclude = b.owner;
  const std::vector<double> ones(n, 1.0);
  const auto g = kernel_sum(StokesletK{}, b.points, pts, ones, tree);
  const auto dg = kernel_sum(StokesletGradK{}, b.points, pts, ones, direct);
  const auto r = kernel_sum(DegenerateK{}, b.points, pts, ones, tree);
  const auto dr = kernel_sum(DegenerateGradK{}, b.points, pts, ones, direct);

  const double n2 = dn * dn;
  std::vector<std::vector<double>> t(4, std::vector<double>(n, 0.0));
#pragma omp parallel for schedule(dynamic, 8)
  for (std::size_t i = 0; i < n; ++i) {
    double s[4] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t q = i * b.per_ball; q < (i + 1) * b.per_ball; ++q) {
      const double w = b.weights[q];
      s[0] += w * n2 * (g[q] / dn - rho.stokes_potential(b.points[q])).squaredNorm();
      s[1] += w * frobenius2(dg[q]) / n2;
      s[2] += w * r[q].squaredNorm() / (n2 * n2);
      s[3] += w * frobenius2(dr[q]) / (n2 * n2 * n2);
    }
    for (int k = 0; k < 4; ++k) t[k][i] = s[k];
  }
  return assemble({"stokeslet", "stokeslet_gradient", "degenerate", "degenerate_gradient"}, t);
}

double h2sharp_value(const Configuration& config, const Density& rho, const HypothesisOptions& opt) {
  const std::size_t n = config.size();
  if (n == 0) return 0.0;
  const double dn = static_cast<double>(n);
  const auto pts = canonical(config.centers);
  SumOptions so = sum_options(opt, true);
  so.exclude_self = true;
  const auto s = kernel_sum(LaplaceK{}, pts, pts, std::vector<double>(n, 1.0), so);
  std::vector<double> v(n);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    const double e = 4.0 * kPi * (s[i] / dn - rho.potential(pts[i]));
    v[i] = e * e;
  }
  return ordered_sum(v) / dn;
}

double h2prime_sharp_value(const Configuration& config, const Density& rho, const HypothesisOptions& opt) {
  const std::size_t n = config.size();
  if (n == 0) return 0.0;
  const double dn = static_cast<double>(n);
  const auto pts = canonical(config.centers);
  SumOptions so = sum_options(opt, true);
  so.exclude_self = true;
  const auto s = kernel_sum(DyadK{}, pts, pts, std::vector<double>(n, 1.0), so);
  std::vector<double> v(n);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    // int (x - y)(x)(x - y)/|x - y|^3 rho(y) dy = 8 pi G_St*rho - 4 pi (G*rho) I
    const Mat3 ref = 8.0 * kPi * rho.stokes_potential(pts[i]) - 4.0 * kPi * rho.potential(pts[i]) * Mat3::Identity();
    v[i] = (s[i] / dn - ref).squaredNorm();
  }
  return ordered_sum(v) / dn;
}

double weaksep_gap(const Configuration& config, const Density& rho) {
  const std::size_t n = config.size();
  double sum = 0.0;
  if (n >= 2) {
    const auto pts = canonical(config.centers);
    SumOptions so;
    so.exclude_self = true;
    const auto s = kernel_sum(LaplaceK{}, pts, pts, std::vector<double>(n, 1.0), so);
    sum = 4.0 * kPi * ordered_sum(s) / (static_cast<double>(n) * static_cast<double>(n));
  }
  return std::abs(sum - rho.mean_inverse_distance());
}

std::string TestField::name() const {
  static const char* axes = "xyz";
  switch (kind) {
    case Kind::Linear: {
      const Vec3 d = direction.normalized();
      for (int a = 0; a < 3; ++a)
        if (std::abs(d[a] - 1.0) < 1e-15) return std::string("linear_") + axes[a];
      return "linear";
    }
    case Kind::Quadratic: return std::string("quadratic_") + axes[axis];
    case Kind::Gaussian: return "gaussian";
  }
  return "unknown";
}

Vec3 TestField::grad(const Vec3& x) const {
  switch (kind) {
    case Kind::Linear: return direction;
    case Kind::Quadratic: return (x[axis] - center[axis]) * Vec3::Unit(axis);
    case Kind::Gaussian: {
      const Vec3 d = x - center;
      return -d / (width * width) * std::exp(-d.squaredNorm() / (2.0 * width * width));
    }
  }
  return Vec3::Zero();
}

double TestField::grad_sup(const Domain& domain) const {
  switch (kind) {
    case Kind::Linear: return direction.norm();
    case Kind::Quadratic:
      return std::max(std::abs(domain.bbox_lo()[axis] - center[axis]), std::abs(domain.bbox_hi()[axis] - center[axis]));
    case Kind::Gaussian: return std::exp(-0.5) / width;
  }
  return 0.0;
}

std::vector<TestField> a2_test_fields(const Domain& domain) {
  std::vector<TestField> f;
  const Vec3 c = domain.centroid();
  for (int a = 0; a < 3; ++a) {
    TestField t;
    t.kind = TestField::Kind::Linear;
    t.direction = Vec3::Unit(a);
    f.push_back(t);
  }
  for (int a = 0; a < 3; ++a) {
    TestField t;
    t.kind = TestField::Kind::Quadratic;
    t.axis = a;
    t.center = c;
    f.push_back(t);
  }
  TestField g;
  g.kind = TestField::Kind::Gaussian;
  g.center = c;
  g.width = 0.25 * (domain.bbox_hi() - domain.bbox_lo()).maxCoeff();
  f.push_back(g);
  return f;
}

namespace {

std::vector<A2Result> a2_values(const Configuration& config, const std::vector<TestField>& fields,
                                const HypothesisOptions& opt) {
  if (config.scaling.kind != ScalingKind::Fraction)
    fail(ErrorCode::InvalidArgument, "a2 needs a fixed volume fraction (fraction scaling)");
  const std::size_t n = config.size(), nf = fields.size();
  std::vector<A2Result> out(nf);
  for (std::size_t k = 0; k < nf; ++k) {
    out[k].field = fields[k].name();
    out[k].grad_sup = fields[k].grad_sup(config.domain);
    out[k].lambda = config.volume_fraction();
  }
  if (n == 0) return out;
  const double dn = static_cast<double>(n);
  const auto pts = canonical(config.centers);
  const BallNodes b = ball_nodes(pts, config.radius, opt.cubature_degree);
  std::vector<std::vector<Vec3>> w(nf, std::vector<Vec3>(n));
  for (std::size_t k = 0; k < nf; ++k)
    for (std::size_t j = 0; j < n; ++j) w[k][j] = fields[k].grad(pts[j]);

  // per[k][i]: integral over ball i for field k
  std::vector<std::vector<double>> per(nf, std::vector<double>(n, 0.0));
  if (opt.method == SumMethod::Tree) {
    SumOptions so = sum_options(opt, true);
    so.exclude = b.owner;
    for (std::size_t k = 0; k < nf; ++k) {
      const auto s = kernel_sum(LaplaceHessK{}, b.points, pts, w[k], so);
      for (std::size_t q = 0; q < s.size(); ++q) per[k][b.owner[q]] += b.weights[q] * s[q].squaredNorm();
    }
  } else {
    // one Hessian evaluation shared by every field
    Eigen::Matrix<double, 3, Eigen::Dynamic> wm(3, nf * n);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < nf; ++k) wm.col(j * nf + k) = w[k][j];
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t i = 0; i < n; ++i) {
      Eigen::Matrix<double, 3, Eigen::Dynamic> acc(3, nf);
      for (std::size_t q = i * b.per_ball; q < (i + 1) * b.per_ball; ++q) {
        acc.setZero();
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i) continue;
          acc.noalias() += kern::laplace_hess(b.points[q] - pts[j]) * wm.middleCols(j * nf, nf);
        }
        for (std::size_t k = 0; k < nf; ++k) per[k][i] += b.weights[q] * acc.col(k).squaredNorm();
      }
    }
  }
  for (std::size_t k = 0; k < nf; ++k) {
    A2Result& r = out[k];
    r.value = ordered_sum(per[k]) / (dn * dn);
    const double g2 = r.grad_sup * r.grad_sup;
    r.eta = g2 > 0.0 ? r.value / g2 : 0.0;
    r.ratio_lambda2 = g2 > 0.0 && r.lambda > 0.0 ? r.value / (r.lambda * r.lambda * g2) : 0.0;
  }
  return out;
}

}  // namespace

A2Result a2_value(const Configuration& config, const TestField& field, const HypothesisOptions& opt) {
  return a2_values(config, {field}, opt)[0];
}

A2Result a2_family_max(const Configuration& config, const HypothesisOptions& opt) {
  const auto all = a2_values(config, a2_test_fields(config.domain), opt);
  std::size_t best = 0;
  for (std::size_t k = 1; k < all.size(); ++k)
    if (all[k].eta > all[best].eta) best = k;
  return all[best];
}

double PairCorrelationModel::exclusion_radius() const {
  return kind == Kind::Hardcore ? c / std::cbrt(lambda0) : 0.0;
}

double PairCorrelationModel::operator()(double r) const {
  if (kind == Kind::Hardcore && r < exclusion_radius()) return 0.0;
  return lambda0 * lambda0;
}

double cond_rho2_value(const PairCorrelationModel& model, double lambda) {
  require(lambda > 0.0 && model.lambda0 > 0.0, "cond_rho2 needs lambda > 0 and lambda0 > 0");
  require(model.c >= 0.0, "hardcore constant must be nonnegative");
  // With u = |z|^3 = a tan(t), a = lambda / lambda0, the integral becomes
  // (4 pi / (3 lambda0^2)) int_0^{pi/2} rho_2((a tan t)^{1/3}) dt.
  const double a = lambda / model.lambda0;
  const double r0 = model.exclusion_radius();
  std::vector<double> cuts = {0.0};
  if (r0 > 0.0) cuts.push_back(std::atan(r0 * r0 * r0 / a));
  cuts.push_back(kPi / 2.0);
  double integral = 0.0;
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    if (cuts[s + 1] <= cuts[s]) continue;
    const auto gl = gauss_legendre(32, cuts[s], cuts[s + 1]);
    for (std::size_t q = 0; q < gl.nodes.size(); ++q)
      integral += gl.weights[q] * model(std::cbrt(a * std::tan(gl.nodes[q])));
  }
  return 4.0 * kPi / (3.0 * model.lambda0 * model.lambda0) * integral;
}

HypothesisReport hypothesis_report(const Configuration& config, const Density& rho, double c,
                                   const HypothesisOptions& opt) {
  HypothesisReport r;
  r.n = config.size();
  r.radius = config.radius;
  r.c = c;
  r.cubature_degree = BallCubature::of_degree(opt.cubature_degree).degree();
  r.method = opt.method;
  r.theta = opt.theta;
  r.h1 = h1_check(config, c);
  if (config.scaling.kind == ScalingKind::Reflexive) {
    r.h2 = h2_value(config, rho, opt);
    r.h2prime = h2prime_value(config, rho, opt);
  }
  r.h2sharp = h2sharp_value(config, rho, opt);
  r.h2prime_sharp = h2prime_sharp_value(config, rho, opt);
  r.weaksep_gap = weaksep_gap(config, rho);
  if (config.scaling.kind == ScalingKind::Fraction) r.a2 = a2_family_max(config, opt);
  return r;
}

}  // namespace effmed
