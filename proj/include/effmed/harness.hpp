#pragma once

// Scenario files, convergence sweeps u_n -> u, rate fits and kernel-sum
// benchmarks.

#include "effmed/io.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace effmed {

struct ProbeSpec {
  Vec3 center = Vec3::Zero();
  double shell_radius = 0.3;
  int count = 200;
  double margin = 2.0;  ///< exclusion margin in units of r_n
};

struct MacroSpec {
  std::string solver = "volume";  ///< "volume" or "radial" (strange model, radial rho and g)
  MacroOptions options;
  int radial_points = 4000;
  double radial_extent = 0.0;  ///< R; 0 picks a default
};

struct Scenario {
  std::string name;
  Problem problem = Problem::DirichletLaplace;
  GeneratorKind generator = GeneratorKind::Periodic;
  double hardcore_c = 1.0;
  double poisson_epsilon = 1.0;
  Density density = Density::uniform_box(Vec3::Zero(), Vec3::Ones());
  Scaling scaling;
  SourceField source;
  std::vector<std::size_t> sweep;  ///< n values (cubes for the periodic generator)
  int replicates = 1;
  std::uint64_t seed = 1;
  ProbeSpec probes;
  MicroOptions micro;
  MacroSpec macro;
  bool hypotheses = true;
  HypothesisOptions hypothesis_options;
  double hypothesis_c = 2.0;
  bool timings = true;  ///< false writes zeros so the CSV is reproducible byte for byte
  std::string csv_path;
  std::string report_path;
};

/// Validating loader; every violation is reported with its JSON path.
Scenario scenario_from_json(const io::json& j);
Scenario load_scenario(const std::string& path);
io::json to_json(const Scenario& s);

struct ConvergenceRow {
  std::string problem;
  std::size_t n = 0;  ///< realized count (differs from the sweep value for Poisson)
  std::size_t target_n = 0;
  std::size_t sweep_index = 0;
  double lambda = 0.0;
  int replicate = 0;
  std::uint64_t seed = 0;
  double radius = 0.0;
  double d_n = 0.0;
  double h1_margin = 0.0;
  std::optional<double> h2, h2prime, h2sharp, h2prime_sharp, weaksep_gap, a2;
  int probes_used = 0;
  int probes_excluded = 0;
  double e_n = 0.0;              ///< relative RMS against the effective solution
  double e_unscreened = 0.0;     ///< relative RMS against the background field
  double normalized_charge = 0.0;
  double t_micro_ms = 0.0;
  double t_macro_ms = 0.0;
  std::string status = "ok";
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double halfwidth = 0.0;  ///< 95% Student-t half-width of the slope
  std::size_t points = 0;
};

struct ConvergenceReport {
  std::string scenario;
  std::vector<ConvergenceRow> rows;
  std::optional<RateFit> rate;             ///< mean e_n per n
  std::optional<RateFit> rate_unscreened;
  bool partial = false;

  /// Fixed column order; see csv_header().
  std::string csv() const;
  static std::string csv_header();
  io::json to_json() const;
  /// Mean of the column per sweep value (ok rows only), in sweep order.
  std::vector<std::pair<std::size_t, double>> mean_by_n(double ConvergenceRow::*column) const;
};

/// Effective solutions keyed by (model, rho, g, grid, lambda); shared between
/// sweep values and replicates.
class MacroCache {
 public:
  struct Entry {
    std::optional<EffectiveField> field;
    std::optional<RadialProfile> radial;
    double solve_ms = 0.0;
  };
  std::shared_ptr<const Entry> get(const std::string& key, const std::function<Entry()>& make, bool* hit = nullptr);
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const Entry>> entries_;
};

/// Configuration for one sweep value; seed is ignored by the periodic generator.
Configuration scenario_configuration(const Scenario& s, std::size_t n, std::uint64_t seed);
/// Uncached macro solve for the scenario's model, density and source.
MacroCache::Entry solve_scenario_macro(const Scenario& s);

ConvergenceReport run_convergence(const Scenario& s, MacroCache* cache = nullptr);

/// OLS of log e on log n. Needs >= 3 points, all e > 0.
RateFit estimate_rate(const std::vector<std::pair<double, double>>& points);

struct BenchRow {
  std::size_t n = 0;
  double theta = 0.0;
  std::optional<double> t_direct_ms;  ///< measured up to the cutoff
  double t_tree_ms = 0.0;
  std::optional<double> speedup;
  double max_rel_error = 0.0;  ///< against direct sums on a target subsample
};

struct BenchOptions {
  std::size_t direct_cutoff = 40000;
  std::size_t error_samples = 500;
  int repeats = 3;  ///< best-of
  std::uint64_t seed = 11;
};

/// Laplace sums over i.i.d. points in the unit cube, weights 1/n, self excluded.
std::vector<BenchRow> bench_kernel_sum(const std::vector<std::size_t>& ns, const std::vector<double>& thetas,
                                       const BenchOptions& opt = {});
std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace effmed
