#include "effmed/macrosolver.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <mutex>
#include <sstream>

namespace effmed {

// ---------------------------------------------------------------- radial

double RadialProfile::value(double radius) const {
  if (r.empty()) return 0.0;
  const double R = r.back();
  if (radius >= R) return decay / radius;
  const double h = R / static_cast<double>(r.size() - 1);
  const std::size_t k = std::min(static_cast<std::size_t>(radius / h), r.size() - 2);
  const double t = (radius - r[k]) / h;
  return (1.0 - t) * u[k] + t * u[k + 1];
}

bool RadialProfile::positive() const {
  return std::all_of(u.begin(), u.end(), [](double v) { return v > 0.0; });
}

RadialProfile solve_strange_radial(const Density& rho, const SourceField& g, double R, int M, double rho_scale) {
  require(rho.is_radial(), "radial solve needs a radial density");
  require(M >= 4, "radial solve needs M >= 4");
  require(rho_scale >= 0.0, "rho_scale must be non-negative");
  const Vec3 c = rho.center();
  double reach = rho.support().radius;
  for (const auto& b : g.bumps()) {
    require((b.center - c).norm() <= 1e-12 * (1.0 + c.norm()), "source bumps must share the density centre");
    reach = std::max(reach, 8.0 * b.width);
  }
  if (R <= 0.0) R = 1.5 * reach;
  if (R < reach)
    fail(ErrorCode::Domain, "radial domain R = " + std::to_string(R) + " is smaller than the supports (" +
                                std::to_string(reach) + ")");

  const double h = R / M;
  RadialProfile p;
  p.center = c;
  p.r.resize(M + 1);
  for (int k = 0; k <= M; ++k) p.r[k] = k * h;

  std::vector<double> lo(M + 1, 0.0), di(M + 1, 0.0), up(M + 1, 0.0), rhs(M + 1, 0.0);
  const double ih2 = 1.0 / (h * h);
  for (int k = 0; k <= M; ++k) {
    const double rk = p.r[k];
    di[k] = 4.0 * kPi * rho_scale * rho.radial_value(rk);
    rhs[k] = g(c + Vec3(rk, 0.0, 0.0));
    if (k == 0) {
      di[0] += 6.0 * ih2;
      up[0] = -6.0 * ih2;
      continue;
    }
    const double am = (rk - 0.5 * h) * (rk - 0.5 * h) / (rk * rk) * ih2;
    const double ap = (rk + 0.5 * h) * (rk + 0.5 * h) / (rk * rk) * ih2;
    di[k] += am + ap;
    lo[k] = -am;
    if (k < M) {
      up[k] = -ap;
    } else {
      // ghost u_{M+1} = u_{M-1} - 2 h u_M / R
      lo[k] -= ap;
      di[k] += ap * 2.0 * h / R;
    }
  }
  // Thomas
  for (int k = 1; k <= M; ++k) {
    const double m = lo[k] / di[k - 1];
    di[k] -= m * up[k - 1];
    rhs[k] -= m * rhs[k - 1];
  }
  p.u.assign(M + 1, 0.0);
  p.u[M] = rhs[M] / di[M];
  for (int k = M - 1; k >= 0; --k) p.u[k] = (rhs[k] - up[k] * p.u[k + 1]) / di[k];
  p.decay = R * p.u[M];
  return p;
}

// ---------------------------------------------------------------- grid

std::string macro_model_name(MacroModel m) {
  switch (m) {
    case MacroModel::Strange: return "strange";
    case MacroModel::Brinkman: return "brinkman";
    case MacroModel::Permittivity: return "permittivity";
  }
  return "?";
}

MacroModel macro_model_from_name(const std::string& name) {
  if (name == "strange" || name == "screened") return MacroModel::Strange;
  if (name == "brinkman") return MacroModel::Brinkman;
  if (name == "permittivity" || name == "conductor") return MacroModel::Permittivity;
  fail(ErrorCode::InvalidArgument, "unknown macro model '" + name + "'");
}

Vec3 GridInfo::node(std::size_t idx) const {
  const int k = static_cast<int>(idx % dims[2]);
  const int j = static_cast<int>((idx / dims[2]) % dims[1]);
  const int i = static_cast<int>(idx / (std::size_t(dims[1]) * dims[2]));
  return origin + h * Vec3(i, j, k);
}

bool GridInfo::inside(const Vec3& x) const {
  const Vec3 l = last();
  for (int a = 0; a < 3; ++a)
    if (x[a] < origin[a] || x[a] > l[a]) return false;
  return true;
}

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

int fast_size(int n) {
  for (int m = n;; ++m) {
    int r = m;
    for (int f : {2, 3, 5, 7})
      while (r % f == 0) r /= f;
    if (r == 1) return m;
  }
}

/// Aperiodic convolution on a grid through zero-padded FFTs. Kernels are
/// sampled at node offsets; the zero offset carries a separate self weight.
class Convolver {
 public:
  explicit Convolver(const GridInfo& g) : grid_(g) {
    for (int a = 0; a < 3; ++a) m_[a] = fast_size(2 * g.dims[a] - 1);
    nr_ = std::size_t(m_[0]) * m_[1] * m_[2];
    nc_ = std::size_t(m_[0]) * m_[1] * (m_[2] / 2 + 1);
    real_ = fftw_alloc_real(nr_);
    cplx_ = fftw_alloc_complex(nc_);
    std::lock_guard<std::mutex> lock(planner_mutex());
    fwd_ = fftw_plan_dft_r2c_3d(m_[0], m_[1], m_[2], real_, cplx_, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_c2r_3d(m_[0], m_[1], m_[2], cplx_, real_, FFTW_ESTIMATE);
  }
  ~Convolver() {
    {
      std::lock_guard<std::mutex> lock(planner_mutex());
      fftw_destroy_plan(fwd_);
      fftw_destroy_plan(bwd_);
    }
    fftw_free(real_);
    fftw_free(cplx_);
  }
  Convolver(const Convolver&) = delete;
  Convolver& operator=(const Convolver&) = delete;

  using Spectrum = std::vector<std::complex<double>>;

  /// f(offset) for offset != 0 (in length units), self for the zero offset.
  std::size_t add_kernel(const std::function<double(const Vec3&)>& f, double self) {
    std::fill(real_, real_ + nr_, 0.0);
    for (int i = 0; i < m_[0]; ++i) {
      const int di = wrap(i, 0);
      if (di == kUnused) continue;
      for (int j = 0; j < m_[1]; ++j) {
        const int dj = wrap(j, 1);
        if (dj == kUnused) continue;
        for (int k = 0; k < m_[2]; ++k) {
          const int dk = wrap(k, 2);
          if (dk == kUnused) continue;
          real_[(std::size_t(i) * m_[1] + j) * m_[2] + k] =
              (di == 0 && dj == 0 && dk == 0) ? self : f(grid_.h * Vec3(di, dj, dk));
        }
      }
    }
    fftw_execute(fwd_);
    kernels_.emplace_back(reinterpret_cast<std::complex<double>*>(cplx_),
                          reinterpret_cast<std::complex<double>*>(cplx_) + nc_);
    return kernels_.size() - 1;
  }

  Spectrum forward(const std::vector<double>& in) {
    std::fill(real_, real_ + nr_, 0.0);
    const auto& d = grid_.dims;
    for (int i = 0; i < d[0]; ++i)
      for (int j = 0; j < d[1]; ++j)
        for (int k = 0; k < d[2]; ++k) real_[(std::size_t(i) * m_[1] + j) * m_[2] + k] = in[grid_.index(i, j, k)];
    fftw_execute(fwd_);
    return Spectrum(reinterpret_cast<std::complex<double>*>(cplx_),
                    reinterpret_cast<std::complex<double>*>(cplx_) + nc_);
  }

  /// out += kernel * in
  void accumulate(Spectrum& out, const Spectrum& in, std::size_t kernel) const {
    const Spectrum& kh = kernels_[kernel];
    for (std::size_t p = 0; p < nc_; ++p) out[p] += kh[p] * in[p];
  }

  Spectrum zeros() const { return Spectrum(nc_, {0.0, 0.0}); }

  std::vector<double> inverse(const Spectrum& s) {
    std::copy(s.begin(), s.end(), reinterpret_cast<std::complex<double>*>(cplx_));
    fftw_execute(bwd_);
    const double scale = 1.0 / static_cast<double>(nr_);
    std::vector<double> out(grid_.size());
    const auto& d = grid_.dims;
    for (int i = 0; i < d[0]; ++i)
      for (int j = 0; j < d[1]; ++j)
        for (int k = 0; k < d[2]; ++k)
          out[grid_.index(i, j, k)] = scale * real_[(std::size_t(i) * m_[1] + j) * m_[2] + k];
    return out;
  }

  std::vector<double> apply(const std::vector<double>& in, std::size_t kernel) {
    Spectrum s = zeros();
    accumulate(s, forward(in), kernel);
    return inverse(s);
  }

 private:
  static constexpr int kUnused = 1 << 30;
  int wrap(int i, int a) const {
    const int n = grid_.dims[a];
    if (i < n) return i;
    if (i > m_[a] - n) return i - m_[a];
    return kUnused;
  }

  GridInfo grid_;
  std::array<int, 3> m_{};
  std::size_t nr_ = 0, nc_ = 0;
  double* real_ = nullptr;
  fftw_complex* cplx_ = nullptr;
  fftw_plan fwd_ = nullptr, bwd_ = nullptr;
  std::vector<Spectrum> kernels_;
};

GridInfo make_grid(const Density& rho, int cells, int margin) {
  require(cells >= 2, "grid needs at least 2 cells across the support");
  require(margin >= 0, "grid margin must be non-negative");
  const Vec3 lo = rho.support().bbox_lo(), hi = rho.support().bbox_hi();
  const Vec3 ext = hi - lo;
  GridInfo g;
  g.h = ext.maxCoeff() / cells;
  Vec3 start;
  for (int a = 0; a < 3; ++a) {
    const int core = std::max(1, static_cast<int>(std::ceil(ext[a] / g.h - 1e-9)));
    g.dims[a] = core + 2 * margin;
    start[a] = 0.5 * (lo[a] + hi[a]) - 0.5 * core * g.h - margin * g.h + 0.5 * g.h;
  }
  g.origin = start;
  return g;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Conjugate gradients for an SPD operator; throws NotConverged with the
/// tail of the residual history on stagnation or exhaustion.
std::vector<double> conjugate_gradients(const std::function<std::vector<double>(const std::vector<double>&)>& apply,
                                        const std::vector<double>& b, double tol, int max_iter,
                                        MacroDiagnostics& diag) {
  const std::size_t n = b.size();
  std::vector<double> x(n, 0.0), r = b, p = b;
  const double bn = std::sqrt(dot(b, b));
  diag.residual_history.clear();
  if (bn == 0.0) {
    diag.residual = 0.0;
    return x;
  }
  double rr = dot(r, r);
  double best = 1.0;
  int since_best = 0;
  for (int it = 1; it <= max_iter; ++it) {
    const std::vector<double> ap = apply(p);
    const double alpha = rr / dot(p, ap);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    const double rr_new = dot(r, r);
    const double res = std::sqrt(rr_new) / bn;
    diag.residual_history.push_back(res);
    diag.iterations = it;
    diag.residual = res;
    if (res <= tol) return x;
    if (res < 0.999 * best) {
      best = res;
      since_best = 0;
    } else if (++since_best >= 50) {
      break;
    }
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
  }
  std::ostringstream os;
  os << "volume-potential CG stalled after " << diag.iterations << " iterations; residual history tail:";
  const std::size_t from = diag.residual_history.size() > 5 ? diag.residual_history.size() - 5 : 0;
  for (std::size_t i = from; i < diag.residual_history.size(); ++i) os << ' ' << diag.residual_history[i];
  fail(ErrorCode::NotConverged, os.str());
}

double cube_inverse_distance(double h) {
  return box::inverse_distance(Vec3::Zero(), Vec3::Constant(-0.5 * h), Vec3::Constant(0.5 * h));
}

void solve_strange(EffectiveField& f, const std::vector<double>& rho, MacroOptions const& opt) {
  const GridInfo& g = f.grid;
  const std::size_t N = g.size();
  const double h3 = g.h * g.h * g.h;
  Convolver conv(g);
  const std::size_t kG = conv.add_kernel([&](const Vec3& d) { return h3 * kern::laplace(d); },
                                         cube_inverse_distance(g.h) / (4.0 * kPi));
  std::vector<double> b(N), sq(N);
  for (std::size_t p = 0; p < N; ++p) {
    b[p] = f.g.potential(g.node(p));
    sq[p] = std::sqrt(f.coupling * rho[p]);
  }
  // (I + S G S) w = S b, S = sqrt(coupling rho), rho u = w / S
  std::vector<double> sb(N);
  for (std::size_t p = 0; p < N; ++p) sb[p] = sq[p] * b[p];
  auto apply = [&](const std::vector<double>& w) {
    std::vector<double> t(N);
    for (std::size_t p = 0; p < N; ++p) t[p] = sq[p] * w[p];
    std::vector<double> c = conv.apply(t, kG);
    for (std::size_t p = 0; p < N; ++p) c[p] = w[p] + sq[p] * c[p];
    return c;
  };
  const std::vector<double> w = conjugate_gradients(apply, sb, opt.tol, opt.max_iter, f.diagnostics);
  std::vector<double> src(N);
  for (std::size_t p = 0; p < N; ++p) src[p] = sq[p] * w[p];  // coupling rho u
  const std::vector<double> pot = conv.apply(src, kG);
  f.values.resize(N);
  for (std::size_t p = 0; p < N; ++p) {
    f.values[p] = b[p] - pot[p];
    if (rho[p] > 0.0) {
      f.active.push_back(g.node(p));
      f.charge.push_back(h3 * src[p]);
    }
  }
}

void solve_brinkman(EffectiveField& f, const std::vector<double>& rho, MacroOptions const& opt) {
  const GridInfo& g = f.grid;
  const std::size_t N = g.size();
  const double h3 = g.h * g.h * g.h;
  Convolver conv(g);
  const Vec3 half = Vec3::Constant(0.5 * g.h);
  const Mat3 self = (cube_inverse_distance(g.h) * Mat3::Identity() + box::dyad(Vec3::Zero(), -half, half)) / (8.0 * kPi);
  std::array<std::array<std::size_t, 3>, 3> kid{};
  for (int a = 0; a < 3; ++a)
    for (int c = a; c < 3; ++c) {
      kid[a][c] = conv.add_kernel([&, a, c](const Vec3& d) { return h3 * kern::stokeslet(d)(a, c); }, self(a, c));
      kid[c][a] = kid[a][c];
    }
  std::vector<double> b(3 * N), sq(N);
  for (std::size_t p = 0; p < N; ++p) {
    const Vec3 v = f.g.stokes_potential(g.node(p));
    for (int a = 0; a < 3; ++a) b[a * N + p] = v[a];
    sq[p] = std::sqrt(f.coupling * rho[p]);
  }
  auto convolve = [&](const std::vector<double>& src) {
    std::array<Convolver::Spectrum, 3> in;
    for (int a = 0; a < 3; ++a) in[a] = conv.forward(std::vector<double>(src.begin() + a * N, src.begin() + (a + 1) * N));
    std::vector<double> out(3 * N);
    for (int a = 0; a < 3; ++a) {
      Convolver::Spectrum s = conv.zeros();
      for (int c = 0; c < 3; ++c) conv.accumulate(s, in[c], kid[a][c]);
      const std::vector<double> r = conv.inverse(s);
      std::copy(r.begin(), r.end(), out.begin() + a * N);
    }
    return out;
  };
  std::vector<double> sb(3 * N);
  for (std::size_t q = 0; q < 3 * N; ++q) sb[q] = sq[q % N] * b[q];
  auto apply = [&](const std::vector<double>& w) {
    std::vector<double> t(3 * N);
    for (std::size_t q = 0; q < 3 * N; ++q) t[q] = sq[q % N] * w[q];
    std::vector<double> c = convolve(t);
    for (std::size_t q = 0; q < 3 * N; ++q) c[q] = w[q] + sq[q % N] * c[q];
    return c;
  };
  const std::vector<double> w = conjugate_gradients(apply, sb, opt.tol, opt.max_iter, f.diagnostics);
  std::vector<double> src(3 * N);
  for (std::size_t q = 0; q < 3 * N; ++q) src[q] = sq[q % N] * w[q];
  const std::vector<double> pot = convolve(src);
  f.velocities.resize(N);
  for (std::size_t p = 0; p < N; ++p) {
    for (int a = 0; a < 3; ++a) f.velocities[p][a] = b[a * N + p] - pot[a * N + p];
    if (rho[p] > 0.0) {
      f.active.push_back(g.node(p));
      f.vcharge.push_back(h3 * Vec3(src[p], src[N + p], src[2 * N + p]));
    }
  }
}

void solve_permittivity(EffectiveField& f, const std::vector<double>& rho) {
  const GridInfo& g = f.grid;
  const std::size_t N = g.size();
  const double h3 = g.h * g.h * g.h;
  const double a = f.coupling;
  Convolver conv(g);
  std::array<std::size_t, 3> kg{};
  for (int c = 0; c < 3; ++c)
    kg[c] = conv.add_kernel([&, c](const Vec3& d) { return h3 * kern::laplace_grad(d)[c]; }, 0.0);
  // d_a d_c G: principal value over the self cell vanishes, the delta part is -I/3
  std::array<std::array<std::size_t, 3>, 3> kh{};
  for (int r = 0; r < 3; ++r)
    for (int c = r; c < 3; ++c) {
      kh[r][c] = conv.add_kernel([&, r, c](const Vec3& d) { return h3 * kern::laplace_hess(d)(r, c); },
                                 r == c ? -1.0 / 3.0 : 0.0);
      kh[c][r] = kh[r][c];
    }
  // u1 = a grad G * (rho F), grad u1 = a Hess G * (rho F)
  auto correction = [&](const std::vector<Vec3>& F, std::vector<double>& u, std::vector<Vec3>* grad) {
    std::array<Convolver::Spectrum, 3> in;
    for (int c = 0; c < 3; ++c) {
      std::vector<double> t(N);
      for (std::size_t p = 0; p < N; ++p) t[p] = a * rho[p] * F[p][c];
      in[c] = conv.forward(t);
    }
    Convolver::Spectrum s = conv.zeros();
    for (int c = 0; c < 3; ++c) conv.accumulate(s, in[c], kg[c]);
    u = conv.inverse(s);
    if (!grad) return;
    grad->assign(N, Vec3::Zero());
    for (int r = 0; r < 3; ++r) {
      Convolver::Spectrum sr = conv.zeros();
      for (int c = 0; c < 3; ++c) conv.accumulate(sr, in[c], kh[r][c]);
      const std::vector<double> v = conv.inverse(sr);
      for (std::size_t p = 0; p < N; ++p) (*grad)[p][r] = v[p];
    }
  };
  std::vector<Vec3> grad0(N);
  std::vector<double> u0(N);
  for (std::size_t p = 0; p < N; ++p) {
    u0[p] = f.g.potential(g.node(p));
    grad0[p] = f.g.potential_gradient(g.node(p));
  }
  std::vector<double> u1, u2;
  std::vector<Vec3> grad1;
  correction(grad0, u1, &grad1);
  correction(grad1, u2, nullptr);
  f.values.resize(N);
  double trunc = 0.0;
  for (std::size_t p = 0; p < N; ++p) {
    f.values[p] = u0[p] + u1[p];
    trunc = std::max(trunc, std::abs(u2[p]));
    if (rho[p] > 0.0) {
      f.active.push_back(g.node(p));
      f.vcharge.push_back(h3 * a * rho[p] * grad0[p]);
    }
  }
  f.diagnostics.truncation = trunc;
  f.diagnostics.iterations = 0;
}

/// Tensor cubic Lagrange interpolation on the 4 x 4 x 4 nodes around x,
/// stencil shifted inward at the grid edge.
template <class F>
double tricubic(const GridInfo& g, const F& v, const Vec3& x) {
  std::array<int, 3> i0;
  std::array<std::array<double, 4>, 3> w;
  for (int a = 0; a < 3; ++a) {
    const double s = (x[a] - g.origin[a]) / g.h;
    i0[a] = std::clamp(static_cast<int>(std::floor(s)) - 1, 0, std::max(0, g.dims[a] - 4));
    const int len = std::min(4, g.dims[a]);
    for (int m = 0; m < 4; ++m) {
      double l = m < len ? 1.0 : 0.0;
      for (int q = 0; q < len && m < len; ++q)
        if (q != m) l *= (s - (i0[a] + q)) / static_cast<double>(m - q);
      w[a][m] = l;
    }
  }
  double out = 0.0;
  for (int p = 0; p < 4; ++p) {
    if (w[0][p] == 0.0) continue;
    for (int q = 0; q < 4; ++q) {
      if (w[1][q] == 0.0) continue;
      for (int r = 0; r < 4; ++r)
        if (w[2][r] != 0.0) out += w[0][p] * w[1][q] * w[2][r] * v(g.index(i0[0] + p, i0[1] + q, i0[2] + r));
    }
  }
  return out;
}

}  // namespace

EffectiveField solve_volume_potential(MacroModel model, const Density& rho, const SourceField& g,
                                      const MacroOptions& opt) {
  require(opt.rho_scale >= 0.0, "rho_scale must be non-negative");
  EffectiveField f;
  f.model = model;
  f.grid = make_grid(rho, opt.cells, opt.margin);
  f.g = g;
  f.rho_scale = opt.rho_scale;
  f.lambda = opt.lambda;
  switch (model) {
    case MacroModel::Strange: f.coupling = 4.0 * kPi * opt.rho_scale; break;
    case MacroModel::Brinkman: f.coupling = 6.0 * kPi * opt.rho_scale; break;
    case MacroModel::Permittivity:
      require(opt.lambda >= 0.0, "lambda must be non-negative");
      f.coupling = 3.0 * opt.lambda * rho.support_volume() * opt.rho_scale;
      if (opt.lambda > 0.1)
        f.diagnostics.warnings.push_back("lambda = " + std::to_string(opt.lambda) +
                                         " > 0.1: first-order permittivity correction may be inaccurate");
      break;
  }
  std::vector<double> r(f.grid.size());
  for (std::size_t p = 0; p < r.size(); ++p) r[p] = rho(f.grid.node(p));
  switch (model) {
    case MacroModel::Strange: solve_strange(f, r, opt); break;
    case MacroModel::Brinkman: solve_brinkman(f, r, opt); break;
    case MacroModel::Permittivity: solve_permittivity(f, r); break;
  }
  return f;
}

std::vector<double> EffectiveField::represent(const std::vector<Vec3>& points, const SumOptions& sum) const {
  require(model != MacroModel::Brinkman, "scalar evaluation of a Brinkman field; use evaluate_velocity");
  std::vector<double> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) out[i] = g.potential(points[i]);
  if (active.empty()) return out;
  if (model == MacroModel::Strange) {
    const auto s = kernel_sum(LaplaceK{}, points, active, charge, sum);
    for (std::size_t i = 0; i < points.size(); ++i) out[i] -= s[i];
  } else {
    const auto s = kernel_sum(LaplaceGradK{}, points, active, vcharge, sum);
    for (std::size_t i = 0; i < points.size(); ++i) out[i] += s[i];
  }
  return out;
}

std::vector<Vec3> EffectiveField::represent_velocity(const std::vector<Vec3>& points, const SumOptions& sum) const {
  require(model == MacroModel::Brinkman, "velocity evaluation needs a Brinkman field");
  std::vector<Vec3> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) out[i] = g.stokes_potential(points[i]);
  if (active.empty()) return out;
  const auto s = kernel_sum(StokesletK{}, points, active, vcharge, sum);
  for (std::size_t i = 0; i < points.size(); ++i) out[i] -= s[i];
  return out;
}

std::vector<double> EffectiveField::evaluate(const std::vector<Vec3>& points, const SumOptions& sum) const {
  std::vector<Vec3> outside;
  std::vector<std::size_t> where;
  std::vector<double> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (grid.inside(points[i])) {
      // tricubic on the correction, background evaluated exactly
      const auto corr = [&](std::size_t p) { return values[p] - g.potential(grid.node(p)); };
      out[i] = g.potential(points[i]) + tricubic(grid, corr, points[i]);
    } else {
      outside.push_back(points[i]);
      where.push_back(i);
    }
  }
  if (model == MacroModel::Brinkman) fail(ErrorCode::InvalidArgument, "scalar evaluation of a Brinkman field; use evaluate_velocity");
  const auto rep = represent(outside, sum);
  for (std::size_t k = 0; k < where.size(); ++k) out[where[k]] = rep[k];
  return out;
}

std::vector<Vec3> EffectiveField::evaluate_velocity(const std::vector<Vec3>& points, const SumOptions& sum) const {
  require(model == MacroModel::Brinkman, "velocity evaluation needs a Brinkman field");
  std::vector<Vec3> outside;
  std::vector<std::size_t> where;
  std::vector<Vec3> out(points.size());
  std::array<std::vector<double>, 3> comp;
  for (int a = 0; a < 3; ++a) {
    comp[a].resize(velocities.size());
    for (std::size_t p = 0; p < velocities.size(); ++p) comp[a][p] = velocities[p][a];
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (grid.inside(points[i])) {
      const Vec3 u0 = g.stokes_potential(points[i]);
      for (int a = 0; a < 3; ++a) {
        const auto corr = [&](std::size_t p) { return comp[a][p] - g.stokes_potential(grid.node(p))[a]; };
        out[i][a] = u0[a] + tricubic(grid, corr, points[i]);
      }
    } else {
      outside.push_back(points[i]);
      where.push_back(i);
    }
  }
  const auto rep = represent_velocity(outside, sum);
  for (std::size_t k = 0; k < where.size(); ++k) out[where[k]] = rep[k];
  return out;
}

double EffectiveField::effective_mass() const {
  require(model == MacroModel::Strange, "effective mass is defined for the strange model");
  double s = g.total_mass();
  for (double c : charge) s -= c;
  return s;
}

}  // namespace effmed
