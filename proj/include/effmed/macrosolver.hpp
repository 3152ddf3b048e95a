#pragma once

// Effective whole-space problems: screened Poisson, Brinkman and the dilute
// permittivity correction. Radial finite differences and a grid
// volume-potential (Lippmann-Schwinger) solver.

#include "effmed/geometry.hpp"
#include "effmed/kernel_sum.hpp"
#include "effmed/microsolver.hpp"

#include <array>
#include <string>
#include <vector>

namespace effmed {

/// u on 0 = r_0 < ... < r_M = R, continued by A / r outside.
struct RadialProfile {
  Vec3 center = Vec3::Zero();
  std::vector<double> r;
  std::vector<double> u;
  double decay = 0.0;  ///< A

  double value(double radius) const;
  double operator()(const Vec3& x) const { return value((x - center).norm()); }
  bool positive() const;
};

/// -(r^2 u')' / r^2 + 4 pi s rho u = g, u'(0) = 0, u'(R) = -u(R) / R, with s =
/// rho_scale. rho must be radial and every bump of g centred at rho's centre.
/// R = 0 picks 1.5 times the larger of the support radius and 8 widths.
RadialProfile solve_strange_radial(const Density& rho, const SourceField& g, double R = 0.0, int M = 4000,
                                   double rho_scale = 1.0);

enum class MacroModel { Strange, Brinkman, Permittivity };

std::string macro_model_name(MacroModel m);
MacroModel macro_model_from_name(const std::string& name);

/// Cell-centred uniform grid.
struct GridInfo {
  Vec3 origin = Vec3::Zero();  ///< first node
  double h = 0.0;
  std::array<int, 3> dims{0, 0, 0};

  std::size_t size() const { return std::size_t(dims[0]) * dims[1] * dims[2]; }
  std::size_t index(int i, int j, int k) const { return (std::size_t(i) * dims[1] + j) * dims[2] + k; }
  Vec3 node(std::size_t idx) const;
  Vec3 last() const { return origin + h * Vec3(dims[0] - 1, dims[1] - 1, dims[2] - 1); }
  bool inside(const Vec3& x) const;
};

struct MacroOptions {
  int cells = 32;         ///< cells across the longest side of the support
  int margin = 2;         ///< empty cells padded around the support
  double tol = 1e-10;     ///< CG relative residual
  int max_iter = 1000;
  double rho_scale = 1.0;  ///< multiplies rho (0 switches the coupling off)
  double lambda = 0.0;     ///< permittivity: volume fraction
};

struct MacroDiagnostics {
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> residual_history;
  std::vector<std::string> warnings;
  /// Permittivity: max over the grid of the explicit second-order term.
  double truncation = 0.0;
};

struct EffectiveField {
  MacroModel model = MacroModel::Strange;
  GridInfo grid;
  SourceField g;
  double rho_scale = 1.0;
  double lambda = 0.0;
  double coupling = 0.0;  ///< 4 pi s, 6 pi s, or 3 lambda |K_rho| s

  std::vector<double> values;     ///< scalar models, every node
  std::vector<Vec3> velocities;   ///< Brinkman, every node
  std::vector<Vec3> active;       ///< nodes with rho > 0
  std::vector<double> charge;     ///< strange: coupling h^3 rho u at the active nodes
  std::vector<Vec3> vcharge;      ///< Brinkman: coupling h^3 rho u; permittivity: coupling h^3 rho grad u0
  MacroDiagnostics diagnostics;

  /// Tricubic interpolation inside the node box, the representation outside.
  std::vector<double> evaluate(const std::vector<Vec3>& points, const SumOptions& sum = {}) const;
  std::vector<Vec3> evaluate_velocity(const std::vector<Vec3>& points, const SumOptions& sum = {}) const;
  /// Representation only (any point away from the active nodes).
  std::vector<double> represent(const std::vector<Vec3>& points, const SumOptions& sum = {}) const;
  std::vector<Vec3> represent_velocity(const std::vector<Vec3>& points, const SumOptions& sum = {}) const;
  /// Strange: int (g - 4 pi s rho u).
  double effective_mass() const;
};

EffectiveField solve_volume_potential(MacroModel model, const Density& rho, const SourceField& g,
                                      const MacroOptions& opt = {});

}  // namespace effmed
