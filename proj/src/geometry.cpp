#include "effmed/geometry.hpp"

#include "effmed/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <unordered_map>

namespace effmed {

// ---------------------------------------------------------------- Domain

Domain Domain::box(const Vec3& lo, const Vec3& hi) {
  require((hi - lo).minCoeff() > 0.0, "box domain needs lo < hi componentwise");
  Domain d;
  d.kind = Kind::Box;
  d.lo = lo;
  d.hi = hi;
  return d;
}

Domain Domain::ball(const Vec3& center, double radius) {
  require(radius > 0.0 && std::isfinite(radius), "ball domain needs a positive radius");
  Domain d;
  d.kind = Kind::Ball;
  d.center = center;
  d.radius = radius;
  return d;
}

double Domain::volume() const {
  if (kind == Kind::Ball) return 4.0 * kPi / 3.0 * radius * radius * radius;
  return (hi - lo).prod();
}

bool Domain::contains(const Vec3& x, double tol) const {
  if (kind == Kind::Ball) return (x - center).norm() <= radius + tol;
  return ((x - lo).array() >= -tol).all() && ((hi - x).array() >= -tol).all();
}

Vec3 Domain::bbox_lo() const { return kind == Kind::Ball ? Vec3(center.array() - radius) : lo; }
Vec3 Domain::bbox_hi() const { return kind == Kind::Ball ? Vec3(center.array() + radius) : hi; }
Vec3 Domain::centroid() const { return kind == Kind::Ball ? center : Vec3(0.5 * (lo + hi)); }

Domain Domain::translated(const Vec3& shift) const {
  Domain d = *this;
  d.lo += shift;
  d.hi += shift;
  d.center += shift;
  return d;
}

// ---------------------------------------------------------------- box integrals

namespace box {
namespace {

// ln(d_k + r), finite for d_k < 0; returns 0 when the prefactor vanishes.
double log_plus(double dk, double r, double rest2) {
  if (dk >= 0.0) return r > 0.0 ? std::log(dk + r) : 0.0;
  if (rest2 <= 0.0) return 0.0;
  return std::log(rest2) - std::log(r - dk);
}

double atan_term(double a, double b, double c, double r) {
  if (a == 0.0 || r == 0.0) return 0.0;
  return std::atan(b * c / (a * r));
}

struct Corner {
  Vec3 d;
  double sign;
};

template <class F>
void for_corners(const Vec3& x, const Vec3& lo, const Vec3& hi, F&& f) {
  for (int c = 0; c < 8; ++c) {
    Vec3 y;
    double s = 1.0;
    for (int k = 0; k < 3; ++k) {
      if (c >> k & 1) {
        y[k] = hi[k];
        s = -s;
      } else {
        y[k] = lo[k];
      }
    }
    f(Corner{x - y, s});
  }
}

struct Logs {
  double r;
  double L[3];
  double A[3];
};

Logs logs_of(const Vec3& d) {
  Logs g;
  const double d1 = d[0], d2 = d[1], d3 = d[2];
  g.r = d.norm();
  g.L[0] = log_plus(d1, g.r, d2 * d2 + d3 * d3);
  g.L[1] = log_plus(d2, g.r, d1 * d1 + d3 * d3);
  g.L[2] = log_plus(d3, g.r, d1 * d1 + d2 * d2);
  g.A[0] = atan_term(d1, d2, d3, g.r);
  g.A[1] = atan_term(d2, d3, d1, g.r);
  g.A[2] = atan_term(d3, d1, d2, g.r);
  return g;
}

Vec3 partials(const Vec3& d, const Logs& g) {
  Vec3 p;
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    p[i] = d[j] * g.L[k] + d[k] * g.L[j] - d[i] * g.A[i];
  }
  return p;
}

}  // namespace

double inverse_distance(const Vec3& x, const Vec3& lo, const Vec3& hi) {
  double sum = 0.0;
  for_corners(x, lo, hi, [&](const Corner& c) {
    const Vec3& d = c.d;
    const Logs g = logs_of(d);
    const double f = d[0] * d[1] * g.L[2] + d[1] * d[2] * g.L[0] + d[2] * d[0] * g.L[1] -
                     0.5 * (d[0] * d[0] * g.A[0] + d[1] * d[1] * g.A[1] + d[2] * d[2] * g.A[2]);
    sum += c.sign * f;
  });
  return sum;
}

Vec3 inverse_distance_grad(const Vec3& x, const Vec3& lo, const Vec3& hi) {
  Vec3 sum = Vec3::Zero();
  for_corners(x, lo, hi, [&](const Corner& c) { sum += c.sign * partials(c.d, logs_of(c.d)); });
  return sum;
}

Mat3 dyad(const Vec3& x, const Vec3& lo, const Vec3& hi) {
  Mat3 m = Mat3::Zero();
  double phi = 0.0;
  for_corners(x, lo, hi, [&](const Corner& c) {
    const Vec3& d = c.d;
    const Logs g = logs_of(d);
    const Vec3 p = partials(d, g);
    phi += c.sign * (d[0] * d[1] * g.L[2] + d[1] * d[2] * g.L[0] + d[2] * d[0] * g.L[1] -
                     0.5 * (d[0] * d[0] * g.A[0] + d[1] * d[1] * g.A[1] + d[2] * d[2] * g.A[2]));
    for (int i = 0; i < 3; ++i) {
      m(i, i) -= c.sign * d[i] * p[i];
      const int j = (i + 1) % 3, k = (i + 2) % 3;
      const double off = -(0.5 * d[k] * g.r + 0.5 * (d[i] * d[i] + d[j] * d[j]) * g.L[k]);
      m(i, j) += c.sign * off;
    }
  });
  for (int i = 0; i < 3; ++i) {
    m(i, i) += phi;
    m((i + 1) % 3, i) = m(i, (i + 1) % 3);
  }
  return m;
}

}  // namespace box

// ---------------------------------------------------------------- Density

namespace {

// Gauss rule on [0, 1] used for every piecewise-polynomial radial integral.
const QuadratureRule1D& unit_gauss() {
  static const QuadratureRule1D rule = gauss_legendre(6, 0.0, 1.0);
  return rule;
}

// Integral over [a, b] of f(s) * rho(s) for a piecewise-linear table.
template <class F>
double radial_integral(const std::vector<std::pair<double, double>>& t, double a, double b, F&& f) {
  if (b <= a) return 0.0;
  const auto& q = unit_gauss();
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    const double s0 = std::max(a, t[k].first), s1 = std::min(b, t[k + 1].first);
    if (s1 <= s0) continue;
    const double dr = t[k + 1].first - t[k].first;
    for (std::size_t m = 0; m < q.nodes.size(); ++m) {
      const double s = s0 + (s1 - s0) * q.nodes[m];
      const double v = t[k].second + (t[k + 1].second - t[k].second) * (s - t[k].first) / dr;
      acc += (s1 - s0) * q.weights[m] * v * f(s);
    }
  }
  return acc;
}

// Radial building blocks shared by the ball and profile densities.
struct RadialMoments {
  double potential;  // (G * rho)(r)
  double inner;      // int_0^r s^2 rho ds
  double b1;         // B'(r), B(x) = int |x - y| rho(y) dy
  double b2;         // B''(r)
};

RadialMoments radial_moments(const std::vector<std::pair<double, double>>& t, double r) {
  const double big = t.back().first;
  RadialMoments m{};
  m.inner = radial_integral(t, 0.0, r, [](double s) { return s * s; });
  const double outer = radial_integral(t, r, big, [](double s) { return s; });
  m.potential = (r > 0.0 ? m.inner / r : 0.0) + outer;
  const double fp = 4.0 * kPi;
  if (r > 0.0) {
    const double in4 = radial_integral(t, 0.0, r, [](double s) { return s * s * s * s; });
    m.b1 = fp * (m.inner - in4 / (3.0 * r * r) + 2.0 * r / 3.0 * outer);
    m.b2 = fp * (2.0 * in4 / (3.0 * r * r * r) + 2.0 / 3.0 * outer);
  } else {
    m.b1 = 0.0;
    m.b2 = fp * 2.0 / 3.0 * outer;
  }
  return m;
}

Mat3 stokes_from_radial(double phi, double b1, double b2, const Vec3& x) {
  const double r = x.norm();
  Mat3 hess;
  if (r == 0.0) {
    hess = b2 * Mat3::Identity();
  } else {
    const Vec3 u = x / r;
    const Mat3 uu = u * u.transpose();
    hess = b2 * uu + (b1 / r) * (Mat3::Identity() - uu);
  }
  return (2.0 * phi * Mat3::Identity() - hess) / (8.0 * kPi);
}

}  // namespace

Density Density::uniform_ball(const Vec3& center, double radius) {
  Density d;
  d.kind_ = Kind::UniformBall;
  d.support_ = Domain::ball(center, radius);
  d.sup_ = 1.0 / d.support_.volume();
  return d;
}

Density Density::uniform_box(const Vec3& lo, const Vec3& hi) {
  Density d;
  d.kind_ = Kind::UniformBox;
  d.support_ = Domain::box(lo, hi);
  d.sup_ = 1.0 / d.support_.volume();
  return d;
}

Density Density::radial_profile(const Vec3& center, std::vector<std::pair<double, double>> table) {
  require(table.size() >= 2, "radial profile needs at least two points");
  require(table.front().first == 0.0, "radial profile must start at r = 0");
  for (std::size_t k = 0; k < table.size(); ++k) {
    require(table[k].second >= 0.0 && std::isfinite(table[k].second), "radial profile values must be >= 0");
    if (k > 0) require(table[k].first > table[k - 1].first, "radial profile r must be strictly increasing");
  }
  const double mass = 4.0 * kPi * radial_integral(table, 0.0, table.back().first, [](double s) { return s * s; });
  require(mass > 0.0, "radial profile has zero mass");
  double sup = 0.0;
  for (auto& [r, v] : table) {
    v /= mass;
    sup = std::max(sup, v);
  }
  Density d;
  d.kind_ = Kind::RadialProfile;
  d.support_ = Domain::ball(center, table.back().first);
  d.sup_ = sup;
  d.table_ = std::move(table);
  return d;
}

double Density::radial_value(double r) const {
  if (kind_ == Kind::UniformBall) return r <= support_.radius ? sup_ : 0.0;
  if (r > table_.back().first) return 0.0;
  auto it = std::upper_bound(table_.begin(), table_.end(), r,
                             [](double v, const std::pair<double, double>& p) { return v < p.first; });
  if (it == table_.end()) return table_.back().second;
  const auto& b = *it;
  const auto& a = *(it - 1);
  return a.second + (b.second - a.second) * (r - a.first) / (b.first - a.first);
}

double Density::operator()(const Vec3& x) const {
  if (kind_ == Kind::UniformBox) return support_.contains(x) ? sup_ : 0.0;
  return radial_value((x - support_.center).norm());
}

double Density::potential(const Vec3& x) const {
  switch (kind_) {
    case Kind::UniformBall: {
      const double R = support_.radius, r = (x - support_.center).norm();
      if (r >= R) return 1.0 / (4.0 * kPi * r);
      return (3.0 * R * R - r * r) / (8.0 * kPi * R * R * R);
    }
    case Kind::UniformBox:
      return box::inverse_distance(x, support_.lo, support_.hi) / (4.0 * kPi * support_.volume());
    case Kind::RadialProfile:
      return radial_moments(table_, (x - support_.center).norm()).potential;
  }
  return 0.0;
}

Vec3 Density::potential_gradient(const Vec3& x) const {
  switch (kind_) {
    case Kind::UniformBall: {
      const double R = support_.radius;
      const Vec3 y = x - support_.center;
      const double r = y.norm();
      if (r >= R) return -y / (4.0 * kPi * r * r * r);
      return -y / (4.0 * kPi * R * R * R);
    }
    case Kind::UniformBox:
      return box::inverse_distance_grad(x, support_.lo, support_.hi) / (4.0 * kPi * support_.volume());
    case Kind::RadialProfile: {
      const Vec3 y = x - support_.center;
      const double r = y.norm();
      if (r == 0.0) return Vec3::Zero();
      const double inner = radial_integral(table_, 0.0, r, [](double s) { return s * s; });
      return -inner / (r * r * r) * y;
    }
  }
  return Vec3::Zero();
}

Mat3 Density::stokes_potential(const Vec3& x) const {
  const Vec3 y = x - support_.center;
  switch (kind_) {
    case Kind::UniformBall: {
      const double R = support_.radius, r = y.norm();
      const double phi = 4.0 * kPi * potential(x);
      double b1, b2;
      if (r >= R) {
        b1 = 1.0 - R * R / (5.0 * r * r);
        b2 = 2.0 * R * R / (5.0 * r * r * r);
      } else {
        b1 = r / R - r * r * r / (5.0 * R * R * R);
        b2 = 1.0 / R - 3.0 * r * r / (5.0 * R * R * R);
      }
      return stokes_from_radial(phi, b1, b2, y);
    }
    case Kind::UniformBox: {
      const double phi = box::inverse_distance(x, support_.lo, support_.hi);
      const Mat3 m = box::dyad(x, support_.lo, support_.hi);
      return (phi * Mat3::Identity() + m) / (8.0 * kPi * support_.volume());
    }
    case Kind::RadialProfile: {
      const RadialMoments m = radial_moments(table_, y.norm());
      return stokes_from_radial(4.0 * kPi * m.potential, m.b1, m.b2, y);
    }
  }
  return Mat3::Zero();
}

double Density::mean_inverse_distance() const {
  switch (kind_) {
    case Kind::UniformBall: return 6.0 / (5.0 * support_.radius);
    case Kind::UniformBox: {
      const Vec3 lo = support_.lo, hi = support_.hi;
      const double v = support_.volume();
      return integrate([&](const Vec3& x) { return box::inverse_distance(x, lo, hi) / v; }, 16);
    }
    case Kind::RadialProfile: {
      const auto& t = table_;
      return 4.0 * kPi *
             radial_integral(t, 0.0, t.back().first,
                             [&](double s) { return s * s * 4.0 * kPi * radial_moments(t, s).potential; });
    }
  }
  return 0.0;
}

double Density::integrate(const std::function<double(const Vec3&)>& f, int order) const {
  require(order >= 1, "integration order must be >= 1");
  if (kind_ == Kind::UniformBox) {
    const Vec3 lo = support_.lo, hi = support_.hi;
    std::array<QuadratureRule1D, 3> q;
    for (int k = 0; k < 3; ++k) q[k] = gauss_legendre(order, lo[k], hi[k]);
    double acc = 0.0;
    for (int i = 0; i < order; ++i)
      for (int j = 0; j < order; ++j)
        for (int k = 0; k < order; ++k)
          acc += q[0].weights[i] * q[1].weights[j] * q[2].weights[k] *
                 f(Vec3(q[0].nodes[i], q[1].nodes[j], q[2].nodes[k]));
    return acc * sup_;
  }
  // spherical coordinates; radial breakpoints follow the profile table
  std::vector<double> breaks;
  if (kind_ == Kind::RadialProfile) {
    for (const auto& p : table_) breaks.push_back(p.first);
  } else {
    breaks = {0.0, support_.radius};
  }
  const SphereRule sphere = sphere_product_rule(order, 2 * order);
  const QuadratureRule1D unit = gauss_legendre(order, 0.0, 1.0);
  double acc = 0.0;
  for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
    const double r0 = breaks[b], r1 = breaks[b + 1];
    for (int m = 0; m < order; ++m) {
      const double r = r0 + (r1 - r0) * unit.nodes[m];
      const double wr = (r1 - r0) * unit.weights[m] * r * r * radial_value(r);
      if (wr == 0.0) continue;
      for (std::size_t a = 0; a < sphere.directions.size(); ++a)
        acc += wr * sphere.weights[a] * f(support_.center + r * sphere.directions[a]);
    }
  }
  return acc;
}

Density Density::translated(const Vec3& shift) const {
  Density d = *this;
  d.support_ = support_.translated(shift);
  return d;
}

// ---------------------------------------------------------------- Scaling / Configuration

double Scaling::radius(std::size_t n, double support_volume) const {
  require(n >= 1, "radius scaling needs n >= 1");
  const double dn = static_cast<double>(n);
  switch (kind) {
    case ScalingKind::Reflexive: return 1.0 / dn;
    case ScalingKind::Fraction:
      require(lambda > 0.0 && lambda < 1.0, "volume fraction must lie in (0, 1)");
      return std::cbrt(3.0 * lambda * support_volume / (4.0 * kPi * dn));
    case ScalingKind::Power:
      require(exponent > 0.0, "power scaling needs a positive exponent");
      return std::pow(dn, -exponent);
  }
  return 0.0;
}

double Configuration::volume_fraction() const {
  return 4.0 * kPi / 3.0 * static_cast<double>(size()) * radius * radius * radius / support_volume;
}

void Configuration::validate() const {
  require(support_volume > 0.0, "configuration support volume must be positive");
  if (centers.empty()) return;
  require(radius > 0.0 && std::isfinite(radius), "configuration radius must be positive");
  for (std::size_t i = 0; i < centers.size(); ++i)
    if (!domain.contains(centers[i], 1e-12))
      fail(ErrorCode::Domain, "center " + std::to_string(i) + " lies outside the domain");
  if (generator.kind != GeneratorKind::Poisson && centers.size() >= 2) {
    const double d = min_distance(centers);
    if (!(d > 2.0 * radius)) {
      const auto [a, b] = closest_pair(centers);
      fail(ErrorCode::Domain, "balls " + std::to_string(a) + " and " + std::to_string(b) + " overlap");
    }
  }
  const double expect = scaling.radius(size(), support_volume);
  if (std::abs(expect - radius) > 1e-12 * expect)
    fail(ErrorCode::InvalidArgument, "radius does not match the declared scaling");
  if (scaling.kind == ScalingKind::Fraction && std::abs(volume_fraction() - scaling.lambda) > 1e-12 * scaling.lambda)
    fail(ErrorCode::InvalidArgument, "volume fraction does not match the declared scaling");
}

Configuration Configuration::translated(const Vec3& shift) const {
  Configuration c = *this;
  for (auto& x : c.centers) x += shift;
  c.domain = domain.translated(shift);
  return c;
}

// ---------------------------------------------------------------- distances

double min_distance_exhaustive(const std::vector<Vec3>& pts) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::min(best, (pts[i] - pts[j]).squaredNorm());
  return std::sqrt(best);
}

std::pair<std::size_t, std::size_t> closest_pair(const std::vector<Vec3>& pts) {
  double best = std::numeric_limits<double>::infinity();
  std::pair<std::size_t, std::size_t> out{0, 0};
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double d = (pts[i] - pts[j]).squaredNorm();
      if (d < best) {
        best = d;
        out = {i, j};
      }
    }
  return out;
}

namespace {

// Uniform bucket grid over a point set, keyed by integer cell triples.
class BucketGrid {
 public:
  BucketGrid(const Vec3& origin, double cell) : origin_(origin), cell_(cell) {}

  std::array<long, 3> cell_of(const Vec3& x) const {
    return {static_cast<long>(std::floor((x[0] - origin_[0]) / cell_)),
            static_cast<long>(std::floor((x[1] - origin_[1]) / cell_)),
            static_cast<long>(std::floor((x[2] - origin_[2]) / cell_))};
  }

  void insert(const Vec3& x, std::size_t idx) { cells_[key(cell_of(x))].push_back(idx); }

  template <class F>
  void for_neighbors(const Vec3& x, F&& f) const {
    const auto c = cell_of(x);
    for (long i = -1; i <= 1; ++i)
      for (long j = -1; j <= 1; ++j)
        for (long k = -1; k <= 1; ++k) {
          auto it = cells_.find(key({c[0] + i, c[1] + j, c[2] + k}));
          if (it == cells_.end()) continue;
          for (std::size_t idx : it->second) f(idx);
        }
  }

 private:
  static std::uint64_t key(const std::array<long, 3>& c) {
    const auto u = [](long v) { return static_cast<std::uint64_t>(v + (1L << 20)) & 0x1fffffULL; };
    return u(c[0]) << 42 | u(c[1]) << 21 | u(c[2]);
  }

  Vec3 origin_;
  double cell_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};

}  // namespace

double min_distance(const std::vector<Vec3>& pts) {
  const std::size_t n = pts.size();
  if (n < 2) return std::numeric_limits<double>::infinity();
  if (n < 64) return min_distance_exhaustive(pts);
  Vec3 lo = pts[0], hi = pts[0];
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double extent = std::max((hi - lo).maxCoeff(), 1e-300);
  double cell = extent / std::cbrt(static_cast<double>(n));
  for (;;) {
    // A pair closer than `cell` always falls in neighboring cells.
    BucketGrid grid(lo, cell);
    for (std::size_t i = 0; i < n; ++i) grid.insert(pts[i], i);
    double best2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
      grid.for_neighbors(pts[i], [&](std::size_t j) {
        if (j > i) best2 = std::min(best2, (pts[i] - pts[j]).squaredNorm());
      });
    if (best2 <= cell * cell) return std::sqrt(best2);
    cell *= 2.0;
  }
}

// ---------------------------------------------------------------- generators

namespace {

Vec3 sample_from(const Density& rho, CounterRng& rng) {
  const Domain& k = rho.support();
  const Vec3 lo = k.bbox_lo(), hi = k.bbox_hi();
  for (;;) {
    const Vec3 x(rng.uniform(lo[0], hi[0]), rng.uniform(lo[1], hi[1]), rng.uniform(lo[2], hi[2]));
    const double v = rho(x);
    if (v <= 0.0) continue;
    if (rho.kind() != Density::Kind::RadialProfile || rng.uniform() * rho.sup() < v) return x;
  }
}

Configuration dart_throw(std::size_t n, const Density& rho, double delta, std::uint64_t seed, Scaling scaling,
                         GeneratorInfo info, long budget) {
  require(n >= 1, "generator needs n >= 1");
  Configuration cfg;
  cfg.scaling = scaling;
  cfg.domain = rho.support();
  cfg.support_volume = rho.support_volume();
  cfg.radius = scaling.radius(n, cfg.support_volume);
  info.seed = seed;

  const double excl = std::max(delta, 2.0 * cfg.radius);
  const Vec3 lo = cfg.domain.bbox_lo();
  const double extent = (cfg.domain.bbox_hi() - lo).maxCoeff();
  const double cell = std::max(excl, extent / std::max(1.0, 2.0 * std::cbrt(static_cast<double>(n))));
  BucketGrid grid(lo, cell);

  CounterRng rng(seed, 0);
  cfg.centers.reserve(n);
  long rejected = 0;
  while (cfg.centers.size() < n) {
    const Vec3 x = sample_from(rho, rng);
    bool ok = true;
    grid.for_neighbors(x, [&](std::size_t j) {
      const double d = (x - cfg.centers[j]).norm();
      if (d < delta || d <= 2.0 * cfg.radius) ok = false;
    });
    if (!ok) {
      if (++rejected > budget) {
        info.retries = rejected;
        if (info.kind == GeneratorKind::Hardcore)
          fail(ErrorCode::Saturated, "hardcore generator saturated after placing " +
                                         std::to_string(cfg.centers.size()) + " of " + std::to_string(n) +
                                         " centers");
        fail(ErrorCode::Saturated, "i.i.d. overlap unresolvable after " + std::to_string(budget) +
                                       " retries (placed " + std::to_string(cfg.centers.size()) +
                                       "); volume fraction too large");
      }
      continue;
    }
    grid.insert(x, cfg.centers.size());
    cfg.centers.push_back(x);
  }
  info.retries = rejected;
  cfg.generator = info;
  return cfg;
}

}  // namespace

Configuration generate_periodic(int m, const Domain& box, Scaling scaling) {
  require(m >= 1, "periodic generator needs m >= 1");
  require(box.kind == Domain::Kind::Box, "periodic generator needs a box domain");
  Configuration cfg;
  const Vec3 step = (box.hi - box.lo) / m;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        cfg.centers.push_back(box.lo + Vec3((i + 0.5) * step[0], (j + 0.5) * step[1], (k + 0.5) * step[2]));
  cfg.domain = box;
  cfg.support_volume = box.volume();
  cfg.scaling = scaling;
  cfg.radius = scaling.radius(cfg.centers.size(), cfg.support_volume);
  cfg.generator.kind = GeneratorKind::Periodic;
  cfg.generator.side = m;
  return cfg;
}

Configuration generate_iid(std::size_t n, const Density& rho, std::uint64_t seed, Scaling scaling) {
  GeneratorInfo info;
  info.kind = GeneratorKind::Iid;
  return dart_throw(n, rho, 0.0, seed, scaling, info, 100 * static_cast<long>(n));
}

Configuration generate_hardcore(std::size_t n, const Density& rho, double c, std::uint64_t seed, Scaling scaling) {
  require(n >= 1, "generator needs n >= 1");
  require(c >= 0.0, "hardcore constant must be >= 0");
  const double delta = c * std::cbrt(1.0 / static_cast<double>(n));
  if (!(static_cast<double>(n) * delta * delta * delta < 6.0 * rho.support_volume() / kPi))
    fail(ErrorCode::InvalidArgument, "hardcore separation infeasible for this support (packing check)");
  GeneratorInfo info;
  info.kind = GeneratorKind::Hardcore;
  info.c = c;
  return dart_throw(n, rho, delta, seed, scaling, info, std::max(1000 * static_cast<long>(n), 2000000L));
}

Configuration generate_poisson(double lambda0, const Domain& window, double eps, std::uint64_t seed,
                               Scaling scaling) {
  require(lambda0 > 0.0 && eps > 0.0, "poisson generator needs lambda0 > 0 and eps > 0");
  CounterRng rng(seed, 0);
  const double mean = lambda0 * window.volume() / (eps * eps * eps);
  std::poisson_distribution<long> count(mean);
  const long n = count(rng);
  Configuration cfg;
  cfg.domain = window;
  cfg.support_volume = window.volume();
  cfg.scaling = scaling;
  const Vec3 lo = window.bbox_lo(), hi = window.bbox_hi();
  while (static_cast<long>(cfg.centers.size()) < n) {
    const Vec3 x(rng.uniform(lo[0], hi[0]), rng.uniform(lo[1], hi[1]), rng.uniform(lo[2], hi[2]));
    if (window.contains(x)) cfg.centers.push_back(x);
  }
  cfg.radius = n > 0 ? scaling.radius(static_cast<std::size_t>(n), cfg.support_volume) : 0.0;
  cfg.generator.kind = GeneratorKind::Poisson;
  cfg.generator.lambda0 = lambda0;
  cfg.generator.epsilon = eps;
  cfg.generator.seed = seed;
  return cfg;
}

}  // namespace effmed
