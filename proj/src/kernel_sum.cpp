#include "effmed/kernel_sum.hpp"

namespace effmed {

namespace detail {

void coincident_error(std::size_t target, std::size_t source) {
  fail(ErrorCode::Domain, "target " + std::to_string(target) + " coincides with source " + std::to_string(source) +
                              " on a singular kernel");
}

}  // namespace detail

namespace {

struct LaplaceTruncK {
  using value_type = double;
  static constexpr bool singular = false;
  double operator()(const Vec3& x) const { return kern::laplace_truncated(x); }
};

struct StokesTruncK {
  using value_type = Mat3;
  static constexpr bool singular = false;
  Mat3 operator()(const Vec3& x) const { return kern::stokes_truncated(x); }
};

struct DipoleTruncK {
  using value_type = Vec3;
  static constexpr bool singular = false;
  Vec3 operator()(const Vec3& x) const { return kern::dipole_truncated(x); }
};

template <class K>
std::vector<KernelValue> boxed(const K& k, const std::vector<Vec3>& t, const std::vector<Vec3>& s,
                               const std::vector<double>& w, const SumOptions& opt) {
  const auto raw = kernel_sum(k, t, s, w, opt);
  return std::vector<KernelValue>(raw.begin(), raw.end());
}

}  // namespace

std::vector<KernelValue> kernel_sum(KernelId id, const std::vector<Vec3>& targets,
                                    const std::vector<Vec3>& sources, const std::vector<double>& weights,
                                    const SumOptions& opt) {
  switch (id) {
    case KernelId::Laplace: return boxed(LaplaceK{}, targets, sources, weights, opt);
    case KernelId::LaplaceGrad:
    case KernelId::Dipole: return boxed(LaplaceGradK{}, targets, sources, weights, opt);
    case KernelId::DipoleGrad: return boxed(LaplaceHessK{}, targets, sources, weights, opt);
    case KernelId::Stokeslet: return boxed(StokesletK{}, targets, sources, weights, opt);
    case KernelId::StokesletGrad: return boxed(StokesletGradK{}, targets, sources, weights, opt);
    case KernelId::StokesDegenerate: return boxed(DegenerateK{}, targets, sources, weights, opt);
    case KernelId::StokesDegenerateGrad: return boxed(DegenerateGradK{}, targets, sources, weights, opt);
    case KernelId::LaplaceTruncated: return boxed(LaplaceTruncK{}, targets, sources, weights, opt);
    case KernelId::StokesTruncated: return boxed(StokesTruncK{}, targets, sources, weights, opt);
    case KernelId::DipoleTruncated: return boxed(DipoleTruncK{}, targets, sources, weights, opt);
    case KernelId::Dyad: return boxed(DyadK{}, targets, sources, weights, opt);
  }
  fail(ErrorCode::Internal, "unhandled kernel id");
}

}  // namespace effmed
