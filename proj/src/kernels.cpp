#include "effmed/kernels.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <utility>

namespace effmed {
namespace {

constexpr std::array<std::pair<KernelId, std::string_view>, 12> kNames{{
    {KernelId::Laplace, "G"},
    {KernelId::LaplaceGrad, "gradG"},
    {KernelId::Dipole, "V"},
    {KernelId::DipoleGrad, "gradV"},
    {KernelId::Stokeslet, "G_St"},
    {KernelId::StokesletGrad, "gradG_St"},
    {KernelId::StokesDegenerate, "R_St"},
    {KernelId::StokesDegenerateGrad, "gradR_St"},
    {KernelId::LaplaceTruncated, "G_trunc"},
    {KernelId::StokesTruncated, "G_St_trunc"},
    {KernelId::DipoleTruncated, "V_trunc"},
    {KernelId::Dyad, "dyad"},
}};

double max_abs(double a) { return std::abs(a); }
double max_abs(const Vec3& v) { return v.cwiseAbs().maxCoeff(); }
double max_abs(const Mat3& m) { return m.cwiseAbs().maxCoeff(); }
double max_abs(const Tensor3& t) {
  return std::max({max_abs(t[0]), max_abs(t[1]), max_abs(t[2])});
}

}  // namespace

std::string_view kernel_name(KernelId id) {
  for (const auto& [k, name] : kNames)
    if (k == id) return name;
  return "?";
}

KernelId kernel_from_name(std::string_view name) {
  for (const auto& [k, n] : kNames)
    if (n == name) return k;
  fail(ErrorCode::InvalidArgument, "unknown kernel '" + std::string(name) + "'");
}

bool kernel_is_singular(KernelId id) {
  return id != KernelId::LaplaceTruncated && id != KernelId::StokesTruncated &&
         id != KernelId::DipoleTruncated;
}

KernelValue eval(KernelId id, const Vec3& x) {
  if (kernel_is_singular(id) && x.squaredNorm() == 0.0)
    fail(ErrorCode::Domain, "kernel " + std::string(kernel_name(id)) + " is singular at x = 0");
  switch (id) {
    case KernelId::Laplace: return kern::laplace(x);
    case KernelId::LaplaceGrad:
    case KernelId::Dipole: return Vec3(kern::laplace_grad(x));
    case KernelId::DipoleGrad: return Mat3(kern::laplace_hess(x));
    case KernelId::Stokeslet: return Mat3(kern::stokeslet(x));
    case KernelId::StokesletGrad: return kern::stokeslet_grad(x);
    case KernelId::StokesDegenerate: return Mat3(kern::degenerate(x));
    case KernelId::StokesDegenerateGrad: return kern::degenerate_grad(x);
    case KernelId::LaplaceTruncated: return kern::laplace_truncated(x);
    case KernelId::StokesTruncated: return Mat3(kern::stokes_truncated(x));
    case KernelId::DipoleTruncated: return Vec3(kern::dipole_truncated(x));
    case KernelId::Dyad: return Mat3(kern::dyad(x));
  }
  fail(ErrorCode::Internal, "unhandled kernel id");
}

double max_abs_diff(const KernelValue& a, const KernelValue& b) {
  require(a.index() == b.index(), "kernel values of different arity");
  return std::visit(
      [&](const auto& va) {
        using T = std::decay_t<decltype(va)>;
        const auto& vb = std::get<T>(b);
        if constexpr (std::is_same_v<T, double>) {
          return std::abs(va - vb);
        } else if constexpr (std::is_same_v<T, Tensor3>) {
          return std::max({max_abs(Mat3(va[0] - vb[0])), max_abs(Mat3(va[1] - vb[1])),
                           max_abs(Mat3(va[2] - vb[2]))});
        } else {
          return max_abs(T(va - vb));
        }
      },
      a);
}

FiniteDifferenceReport finite_difference_check(KernelId id, const Vec3& x, double h) {
  require(h > 0.0 && x.norm() > 2.0 * h, "finite_difference_check needs |x| > 2h");
  FiniteDifferenceReport rep;

  // Gradient partner of each kernel, when one exists.
  auto partner = [&]() -> std::optional<KernelId> {
    switch (id) {
      case KernelId::Laplace: return KernelId::LaplaceGrad;
      case KernelId::LaplaceGrad:
      case KernelId::Dipole: return KernelId::DipoleGrad;
      case KernelId::Stokeslet: return KernelId::StokesletGrad;
      case KernelId::StokesDegenerate: return KernelId::StokesDegenerateGrad;
      default: return std::nullopt;
    }
  }();

  std::array<KernelValue, 3> numeric;
  for (int k = 0; k < 3; ++k) {
    const Vec3 e = h * Vec3::Unit(k);
    const KernelValue fp = eval(id, x + e);
    const KernelValue fm = eval(id, x - e);
    numeric[k] = std::visit(
        [&](const auto& vp) -> KernelValue {
          using T = std::decay_t<decltype(vp)>;
          const auto& vm = std::get<T>(fm);
          if constexpr (std::is_same_v<T, double>) {
            return (vp - vm) / (2.0 * h);
          } else if constexpr (std::is_same_v<T, Tensor3>) {
            return Tensor3{};
          } else {
            return T((vp - vm) / (2.0 * h));
          }
        },
        fp);
  }

  if (partner) {
    const KernelValue g = eval(*partner, x);
    double mismatch = 0.0;
    if (const auto* v = std::get_if<Vec3>(&g)) {
      for (int k = 0; k < 3; ++k) mismatch = std::max(mismatch, std::abs(std::get<double>(numeric[k]) - (*v)[k]));
    } else if (const auto* m = std::get_if<Mat3>(&g)) {
      // column k of the Hessian is d_k of the gradient
      for (int k = 0; k < 3; ++k)
        mismatch = std::max(mismatch, max_abs(Vec3(std::get<Vec3>(numeric[k]) - m->col(k))));
    } else if (const auto* t = std::get_if<Tensor3>(&g)) {
      for (int k = 0; k < 3; ++k)
        mismatch = std::max(mismatch, max_abs(Mat3(std::get<Mat3>(numeric[k]) - (*t)[k])));
    }
    rep.gradient_mismatch = mismatch;
  }

  if (id == KernelId::Stokeslet || id == KernelId::StokesDegenerate || id == KernelId::StokesTruncated) {
    double div = 0.0;
    for (int i = 0; i < 3; ++i) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += std::get<Mat3>(numeric[k])(i, k);
      div = std::max(div, std::abs(s));
    }
    rep.row_divergence = div;
  }

  const KernelValue a = eval(id, x);
  const KernelValue b = eval(id, Vec3(-x));
  if (const auto* m = std::get_if<Mat3>(&a)) {
    rep.symmetry_defect = std::max(max_abs_diff(a, b), max_abs(Mat3(*m - m->transpose())));
  } else if (std::holds_alternative<double>(a)) {
    rep.symmetry_defect = max_abs_diff(a, b);
  }
  return rep;
}

}  // namespace effmed
