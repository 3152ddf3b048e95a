#pragma once

// Pairwise kernel sums  out_i = sum_j K(t_i - s_j) (x) w_j, directly or through
// a Barnes-Hut octree with monopole + dipole (+ quadrupole) far-field moments.

#include "effmed/kernels.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace effmed {

enum class SumMethod { Direct, Tree };

struct SumOptions {
  SumMethod method = SumMethod::Direct;
  double theta = 0.4;           ///< opening parameter: far field when side < theta * distance
  bool exclude_self = false;    ///< skip source j == target i
  std::size_t leaf_size = 24;
  /// When non-empty, target i skips source exclude[i] (kNoSource: none); takes
  /// precedence over exclude_self.
  std::vector<std::size_t> exclude;
};

inline constexpr std::size_t kNoSource = std::numeric_limits<std::size_t>::max();

namespace detail {

inline std::size_t excluded_source(const SumOptions& opt, std::size_t i, std::size_t ns) {
  if (!opt.exclude.empty()) return opt.exclude[i];
  return opt.exclude_self && i < ns ? i : kNoSource;
}

template <class T>
T zero_of() {
  if constexpr (std::is_same_v<T, double>) {
    return 0.0;
  } else if constexpr (std::is_same_v<T, Tensor3>) {
    return Tensor3{Mat3::Zero(), Mat3::Zero(), Mat3::Zero()};
  } else {
    return T::Zero();
  }
}

inline void add_to(double& a, double b) { a += b; }
inline void add_to(Vec3& a, const Vec3& b) { a += b; }
inline void add_to(Mat3& a, const Mat3& b) { a += b; }
inline void add_to(Tensor3& a, const Tensor3& b) {
  for (int k = 0; k < 3; ++k) a[k] += b[k];
}

inline double contract(double k, double w) { return k * w; }
inline Vec3 contract(const Vec3& k, double w) { return k * w; }
inline double contract(const Vec3& k, const Vec3& w) { return k.dot(w); }
inline Mat3 contract(const Mat3& k, double w) { return k * w; }
inline Vec3 contract(const Mat3& k, const Vec3& w) { return k * w; }
inline Tensor3 contract(const Tensor3& k, double w) { return Tensor3{k[0] * w, k[1] * w, k[2] * w}; }
/// (i, k) entry = sum_j d_k K_ij w_j
inline Mat3 contract(const Tensor3& k, const Vec3& w) {
  Mat3 m;
  for (int c = 0; c < 3; ++c) m.col(c) = k[c] * w;
  return m;
}

template <class W>
constexpr int channels() {
  return std::is_same_v<W, double> ? 1 : 3;
}

template <class W>
double channel(const W& w, int a) {
  if constexpr (std::is_same_v<W, double>) {
    (void)a;
    return w;
  } else {
    return w[a];
  }
}

template <class W>
W unit_weight(int a) {
  if constexpr (std::is_same_v<W, double>) {
    (void)a;
    return 1.0;
  } else {
    return Vec3::Unit(a);
  }
}

template <class K>
concept Expandable = requires(const K& k, const Vec3& x) { k.dir(x, x); };

/// Kernels may fuse the whole scalar-weight far-field evaluation.
template <class K, class W>
concept Fused = std::is_same_v<W, double> &&
                requires(const K& k, const Vec3& x, const Mat3& q) { k.far(x, 1.0, x, q); };

template <class K>
concept Quadrupolar = requires(const K& k, const Vec3& x, const Mat3& q) { k.quad(x, q); };

[[noreturn]] void coincident_error(std::size_t target, std::size_t source);

}  // namespace detail

template <class K, class W>
using SumValue = decltype(detail::contract(std::declval<typename K::value_type>(), std::declval<W>()));

/// Octree over weighted sources. Moments are taken about the mean source
/// position c of each cell: W = sum w_j, D_a = sum (s_j - c) w_j[a] and
/// Q_a = sum (s_j - c)(s_j - c)^T w_j[a]. The quadrupole is used only for
/// kernels that provide quad().
template <class W>
class Octree {
 public:
  static constexpr int kChannels = detail::channels<W>();

  struct Cell {
    Vec3 center;  // geometric centre of the cube
    Vec3 expand;  // expansion centre: mean source position
    double side;
    std::size_t begin, end;  // range in the permuted source array
    std::array<int, 8> child{-1, -1, -1, -1, -1, -1, -1, -1};
    bool leaf = true;
    W weight;
    std::array<Vec3, kChannels> dipole;
    std::array<Mat3, kChannels> quadrupole;
  };

  Octree(const std::vector<Vec3>& sources, const std::vector<W>& weights, std::size_t leaf_size = 24)
      : leaf_size_(std::max<std::size_t>(1, leaf_size)) {
    require(sources.size() == weights.size(), "weights length must equal sources length");
    const std::size_t n = sources.size();
    order_.resize(n);
    for (std::size_t i = 0; i < n; ++i) order_[i] = i;
    if (n == 0) return;
    Vec3 lo = sources[0], hi = sources[0];
    for (const auto& s : sources) {
      lo = lo.cwiseMin(s);
      hi = hi.cwiseMax(s);
    }
    const double side = std::max((hi - lo).maxCoeff(), 1e-300) * (1.0 + 1e-12);
    points_ = sources;
    cells_.push_back(make_cell(0.5 * (lo + hi), side, 0, n));
    build(0, 0);
    pts_.resize(n);
    wts_.resize(n);
    position_.resize(n);
    for (std::size_t p = 0; p < n; ++p) {
      pts_[p] = sources[order_[p]];
      wts_[p] = weights[order_[p]];
      position_[order_[p]] = p;
    }
    points_.clear();
    points_.shrink_to_fit();
    moments(0);
    nodes_.resize(cells_.size());
    for (std::size_t i = 0; i < cells_.size(); ++i) {
      const Cell& c = cells_[i];
      Node& nd = nodes_[i];
      nd.ex = c.expand[0];
      nd.ey = c.expand[1];
      nd.ez = c.expand[2];
      nd.side2 = c.side * c.side;
      nd.begin = c.begin;
      nd.end = c.end;
      nd.first_child = -1;
      nd.nchild = 0;
      for (int k = 0; k < 8; ++k)
        if (c.child[k] >= 0) {
          if (nd.first_child < 0) nd.first_child = c.child[k];
          ++nd.nchild;
        }
    }
  }

  const std::vector<Cell>& cells() const { return cells_; }
  const std::vector<std::size_t>& order() const { return order_; }
  const std::vector<Vec3>& points() const { return pts_; }
  const std::vector<W>& weights() const { return wts_; }
  std::size_t position_of(std::size_t source) const { return position_[source]; }
  bool empty() const { return cells_.empty(); }

  /// Sum at one target; `exclude` is a source index or npos.
  template <class K>
  SumValue<K, W> evaluate(const K& kernel, const Vec3& x, double theta, std::size_t exclude,
                          std::size_t target_index) const {
    using Out = SumValue<K, W>;
    Out acc = detail::zero_of<Out>();
    if (cells_.empty()) return acc;
    const std::size_t xpos = exclude == npos ? npos : position_[exclude];
    const double theta2 = theta * theta;
    std::array<int, 512> stack;
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
      const int id = stack[--top];
      const Node& nd = nodes_[id];
      const bool holds_excluded = xpos >= nd.begin && xpos < nd.end;
      if (!holds_excluded && (nd.nchild > 0 || nd.end - nd.begin > kLeafFar)) {
        const Vec3 d(x[0] - nd.ex, x[1] - nd.ey, x[2] - nd.ez);
        if (nd.side2 < theta2 * d.squaredNorm()) {
          const Cell& c = cells_[id];
          if constexpr (detail::Fused<K, W>) {
            detail::add_to(acc, kernel.far(d, c.weight, c.dipole[0], c.quadrupole[0]));
          } else {
            detail::add_to(acc, detail::contract(kernel(d), c.weight));
            far_dipole(kernel, d, c, acc);
          }
          continue;
        }
      }
      if (nd.nchild == 0) {
        for (std::size_t p = nd.begin; p < nd.end; ++p) {
          if (p == xpos) continue;
          const Vec3 d = x - pts_[p];
          if (K::singular && d.squaredNorm() == 0.0) detail::coincident_error(target_index, order_[p]);
          detail::add_to(acc, detail::contract(kernel(d), wts_[p]));
        }
        continue;
      }
      for (int k = nd.first_child + nd.nchild - 1; k >= nd.first_child; --k) stack[top++] = k;
    }
    return acc;
  }

  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
  /// Leaves with more sources than this may also be taken as far field.
  static constexpr std::size_t kLeafFar = 8;

 private:
  template <class K>
  void far_dipole(const K& kernel, const Vec3& d, const Cell& c, SumValue<K, W>& acc) const {
    for (int a = 0; a < kChannels; ++a) {
      auto t = detail::contract(kernel.dir(d, c.dipole[a]), detail::unit_weight<W>(a));
      detail::add_to(acc, decltype(t)(-t));
      if constexpr (detail::Quadrupolar<K>)
        detail::add_to(acc, detail::contract(kernel.quad(d, c.quadrupole[a]), 0.5 * detail::unit_weight<W>(a)));
    }
  }

  // Children of a cell occupy consecutive slots.
  void build(int id, int depth) {
    const Vec3 center = cells_[id].center;
    const double side = cells_[id].side;
    const std::size_t begin = cells_[id].begin, end = cells_[id].end;
    if (end - begin <= leaf_size_ || depth >= 40) return;
    // bucket by octant, stable within each octant
    std::array<std::vector<std::size_t>, 8> oct;
    for (std::size_t p = begin; p < end; ++p) {
      const Vec3& s = points_[order_[p]];
      const int k = (s[0] >= center[0]) | (s[1] >= center[1]) << 1 | (s[2] >= center[2]) << 2;
      oct[k].push_back(order_[p]);
    }
    std::size_t p = begin;
    std::array<std::size_t, 9> bounds;
    for (int k = 0; k < 8; ++k) {
      bounds[k] = p;
      for (std::size_t idx : oct[k]) order_[p++] = idx;
    }
    bounds[8] = end;
    cells_[id].leaf = false;
    std::vector<int> kids;
    for (int k = 0; k < 8; ++k) {
      if (bounds[k + 1] == bounds[k]) continue;
      const Vec3 off((k & 1 ? 0.25 : -0.25) * side, (k & 2 ? 0.25 : -0.25) * side, (k & 4 ? 0.25 : -0.25) * side);
      const int child = static_cast<int>(cells_.size());
      cells_.push_back(make_cell(center + off, 0.5 * side, bounds[k], bounds[k + 1]));
      cells_[id].child[k] = child;
      kids.push_back(child);
    }
    for (int child : kids) build(child, depth + 1);
  }

  static Cell make_cell(const Vec3& center, double side, std::size_t begin, std::size_t end) {
    Cell c{center, center, side, begin, end, {}, true, detail::zero_of<W>(), {}, {}};
    c.child.fill(-1);
    return c;
  }

  void moments(int id) {
    Cell& c = cells_[id];
    W w = detail::zero_of<W>();
    std::array<Vec3, kChannels> dip;
    std::array<Mat3, kChannels> quad;
    for (auto& v : dip) v = Vec3::Zero();
    for (auto& q : quad) q = Mat3::Zero();
    Vec3 mean = Vec3::Zero();
    for (std::size_t p = c.begin; p < c.end; ++p) mean += pts_[p];
    c.expand = mean / static_cast<double>(c.end - c.begin);
    if (c.leaf) {
      for (std::size_t p = c.begin; p < c.end; ++p) {
        detail::add_to(w, wts_[p]);
        const Vec3 r = pts_[p] - c.expand;
        for (int a = 0; a < kChannels; ++a) {
          dip[a] += r * detail::channel(wts_[p], a);
          quad[a] += r * r.transpose() * detail::channel(wts_[p], a);
        }
      }
    } else {
      for (int k = 0; k < 8; ++k) {
        if (c.child[k] < 0) continue;
        moments(c.child[k]);
        const Cell& ch = cells_[c.child[k]];
        detail::add_to(w, ch.weight);
        const Vec3 sft = ch.expand - c.expand;
        for (int a = 0; a < kChannels; ++a) {
          const double wa = detail::channel(ch.weight, a);
          dip[a] += ch.dipole[a] + sft * wa;
          quad[a] += ch.quadrupole[a] + sft * ch.dipole[a].transpose() + ch.dipole[a] * sft.transpose() +
                     sft * sft.transpose() * wa;
        }
      }
    }
    cells_[id].weight = w;
    cells_[id].dipole = dip;
    cells_[id].quadrupole = quad;
  }

  // Traversal data, kept compact.
  struct Node {
    double ex, ey, ez, side2;
    std::size_t begin, end;
    int first_child, nchild;
  };

  std::size_t leaf_size_;
  std::vector<Cell> cells_;
  std::vector<Node> nodes_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> position_;
  std::vector<Vec3> points_;  // only during build
  std::vector<Vec3> pts_;
  std::vector<W> wts_;
};

/// Sum for every target. Target i excludes source i when exclude_self is set.
/// Results do not depend on the OpenMP thread count.
template <class K, class W>
std::vector<SumValue<K, W>> kernel_sum(const K& kernel, const std::vector<Vec3>& targets,
                                       const std::vector<Vec3>& sources, const std::vector<W>& weights,
                                       const SumOptions& opt = {}) {
  using Out = SumValue<K, W>;
  require(weights.size() == sources.size(), "weights length must equal sources length");
  const std::size_t nt = targets.size(), ns = sources.size();
  require(opt.exclude.empty() || opt.exclude.size() == nt, "exclusion list length must equal targets length");
  std::vector<Out> out(nt, detail::zero_of<Out>());
  std::atomic<std::size_t> bad_target{std::numeric_limits<std::size_t>::max()};
  std::vector<std::size_t> bad_source(nt, 0);

  if (opt.method == SumMethod::Direct) {
#pragma omp parallel for schedule(dynamic, 64)
    for (std::size_t i = 0; i < nt; ++i) {
      Out acc = detail::zero_of<Out>();
      const std::size_t skip = detail::excluded_source(opt, i, ns);
      for (std::size_t j = 0; j < ns; ++j) {
        if (j == skip) continue;
        const Vec3 d = targets[i] - sources[j];
        if (K::singular && d.squaredNorm() == 0.0) {
          bad_source[i] = j;
          std::size_t cur = bad_target.load();
          while (i < cur && !bad_target.compare_exchange_weak(cur, i)) {
          }
          break;
        }
        detail::add_to(acc, detail::contract(kernel(d), weights[j]));
      }
      out[i] = acc;
    }
  } else {
    if constexpr (detail::Expandable<K>) {
      require(opt.theta >= 0.0 && opt.theta < 1.0, "tree opening parameter must lie in [0, 1)");
      const Octree<W> tree(sources, weights, opt.leaf_size);
#pragma omp parallel for schedule(dynamic, 64)
      for (std::size_t i = 0; i < nt; ++i) {
        try {
          out[i] = tree.evaluate(kernel, targets[i], opt.theta, detail::excluded_source(opt, i, ns), i);
        } catch (const Error&) {
          std::size_t cur = bad_target.load();
          while (i < cur && !bad_target.compare_exchange_weak(cur, i)) {
          }
        }
      }
      if (bad_target.load() != std::numeric_limits<std::size_t>::max()) {
        const std::size_t i = bad_target.load();
        for (std::size_t j = 0; j < ns; ++j)
          if (j != detail::excluded_source(opt, i, ns) && targets[i] == sources[j]) detail::coincident_error(i, j);
      }
      return out;
    } else {
      fail(ErrorCode::InvalidArgument, "kernel has no far-field expansion; use the direct method");
    }
  }
  if (bad_target.load() != std::numeric_limits<std::size_t>::max())
    detail::coincident_error(bad_target.load(), bad_source[bad_target.load()]);
  return out;
}

/// Runtime-dispatched scalar-weight sum used by the C API and the CLI.
std::vector<KernelValue> kernel_sum(KernelId id, const std::vector<Vec3>& targets,
                                    const std::vector<Vec3>& sources, const std::vector<double>& weights,
                                    const SumOptions& opt = {});

}  // namespace effmed
