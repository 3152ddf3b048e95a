#include "effmed/harness.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace effmed {

using io::json;

// ---------------------------------------------------------------- scenario

namespace {

/// Collects every schema violation before failing.
class Checker {
 public:
  template <class T>
  T get(const json& j, const std::string& path, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
      return j.at(key).get<T>();
    } catch (const json::exception&) {
      errors_.push_back(path + "/" + key + ": wrong type (" + j.at(key).dump() + ")");
      return fallback;
    }
  }
  template <class F>
  auto parse(const std::string& path, F&& f) -> decltype(f()) {
    try {
      return f();
    } catch (const std::exception& e) {
      errors_.push_back(path + ": " + e.what());
      return decltype(f()){};
    }
  }
  void keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) {
      errors_.push_back(path + ": expected an object");
      return;
    }
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j.items())
      if (!ok.count(k)) errors_.push_back(path + "/" + k + ": unknown key");
  }
  void check(bool cond, const std::string& msg) {
    if (!cond) errors_.push_back(msg);
  }
  void finish() const {
    if (errors_.empty()) return;
    std::string msg = "invalid scenario:";
    for (const auto& e : errors_) msg += "\n  " + e;
    fail(ErrorCode::InvalidArgument, msg);
  }

 private:
  std::vector<std::string> errors_;
};

bool is_cube(std::size_t n) {
  const auto m = static_cast<std::size_t>(std::llround(std::cbrt(static_cast<double>(n))));
  return m * m * m == n;
}

}  // namespace

Scenario scenario_from_json(const json& j) {
  Checker ck;
  Scenario s;
  ck.keys(j, "", {"name", "problem", "generator", "density", "scaling", "source", "sweep", "replicates", "seed",
                  "probes", "micro", "macro", "hypotheses", "timings", "output"});
  if (!j.is_object()) ck.finish();
  s.name = ck.get<std::string>(j, "", "name", "scenario");
  s.problem = ck.parse("/problem", [&] { return problem_from_name(ck.get<std::string>(j, "", "problem", "strange")); });

  const json gen = j.value("generator", json{{"kind", "periodic"}});
  ck.keys(gen, "/generator", {"kind", "c", "epsilon"});
  s.generator = ck.parse("/generator/kind", [&] { return io::generator_from_name(ck.get<std::string>(gen, "/generator", "kind", "periodic")); });
  ck.check(s.generator != GeneratorKind::Explicit, "/generator/kind: explicit configurations cannot be swept");
  s.hardcore_c = ck.get<double>(gen, "/generator", "c", 1.0);
  s.poisson_epsilon = ck.get<double>(gen, "/generator", "epsilon", 1.0);
  ck.check(s.hardcore_c > 0.0, "/generator/c: must be positive");
  ck.check(s.poisson_epsilon > 0.0, "/generator/epsilon: must be positive");

  if (j.contains("density")) {
    if (auto d = ck.parse("/density", [&] { return std::optional<Density>(io::density_from_json(j.at("density"))); }))
      s.density = *d;
  }
  if (j.contains("scaling"))
    s.scaling = ck.parse("/scaling", [&] { return io::scaling_from_json(j.at("scaling")); });
  if (j.contains("source")) {
    s.source = ck.parse("/source", [&] { return io::source_from_json(j.at("source")); });
  } else {
    ck.check(false, "/source: required");
  }
  for (const auto& b : s.source.bumps()) {
    if (s.problem == Problem::DirichletStokes)
      ck.check(b.force.norm() > 0.0 || b.mass == 0.0, "/source: Stokes scenarios need force bumps");
    ck.check(b.width > 0.0, "/source: bump widths must be positive");
  }
  if (s.problem == Problem::Conductor)
    ck.check(s.scaling.kind == ScalingKind::Fraction, "/scaling: the permittivity problem needs fraction scaling");

  s.sweep = ck.get<std::vector<std::size_t>>(j, "", "sweep", {});
  ck.check(!s.sweep.empty(), "/sweep: needs at least one value");
  for (std::size_t k = 0; k < s.sweep.size(); ++k) {
    if (s.generator == GeneratorKind::Periodic)
      ck.check(s.sweep[k] >= 1, "/sweep/" + std::to_string(k) + ": periodic sweeps need n >= 1");
    if (k > 0) ck.check(s.sweep[k] > s.sweep[k - 1], "/sweep: must be strictly increasing");
    if (s.generator == GeneratorKind::Periodic)
      ck.check(is_cube(s.sweep[k]), "/sweep/" + std::to_string(k) + ": periodic sweeps need perfect cubes");
  }
  if (s.generator == GeneratorKind::Periodic)
    ck.check(s.density.kind() == Density::Kind::UniformBox, "/density: the periodic generator needs a box density");
  s.replicates = ck.get<int>(j, "", "replicates", 1);
  ck.check(s.replicates >= 1, "/replicates: must be >= 1");
  s.seed = ck.get<std::uint64_t>(j, "", "seed", 1);

  const json pr = j.value("probes", json::object());
  ck.keys(pr, "/probes", {"center", "shell_radius", "count", "margin"});
  s.probes.center = pr.contains("center") ? ck.parse("/probes/center", [&] { return Vec3(io::vec3_from_json(pr.at("center"))); })
                                          : s.density.center();
  s.probes.shell_radius = ck.get<double>(pr, "/probes", "shell_radius", 0.3);
  s.probes.count = ck.get<int>(pr, "/probes", "count", 200);
  s.probes.margin = ck.get<double>(pr, "/probes", "margin", 2.0);
  ck.check(s.probes.shell_radius > 0.0, "/probes/shell_radius: must be positive");
  ck.check(s.probes.count >= 1, "/probes/count: must be >= 1");
  ck.check(s.probes.margin >= 2.0, "/probes/margin: must be >= 2");

  const json mi = j.value("micro", json::object());
  ck.keys(mi, "/micro", {"method", "omega", "max_sweeps", "tol", "pure_stokeslet"});
  const std::string mm = ck.get<std::string>(mi, "/micro", "method", "direct");
  ck.check(mm == "direct" || mm == "reflections", "/micro/method: direct or reflections");
  s.micro.method = mm == "reflections" ? MicroMethod::Reflections : MicroMethod::Direct;
  s.micro.omega = ck.get<double>(mi, "/micro", "omega", s.micro.omega);
  s.micro.max_sweeps = ck.get<int>(mi, "/micro", "max_sweeps", s.micro.max_sweeps);
  s.micro.tol = ck.get<double>(mi, "/micro", "tol", s.micro.tol);
  s.micro.pure_stokeslet = ck.get<bool>(mi, "/micro", "pure_stokeslet", false);

  const json ma = j.value("macro", json::object());
  ck.keys(ma, "/macro", {"solver", "cells", "margin", "tol", "max_iter", "rho_scale", "radial_points", "radial_extent"});
  s.macro.solver = ck.get<std::string>(ma, "/macro", "solver", "volume");
  ck.check(s.macro.solver == "volume" || s.macro.solver == "radial", "/macro/solver: volume or radial");
  if (s.macro.solver == "radial") {
    ck.check(s.problem == Problem::DirichletLaplace, "/macro/solver: the radial solver covers the strange model only");
    ck.check(s.density.is_radial(), "/macro/solver: the radial solver needs a radial density");
  }
  s.macro.options.cells = ck.get<int>(ma, "/macro", "cells", 32);
  s.macro.options.margin = ck.get<int>(ma, "/macro", "margin", 2);
  s.macro.options.tol = ck.get<double>(ma, "/macro", "tol", 1e-10);
  s.macro.options.max_iter = ck.get<int>(ma, "/macro", "max_iter", 1000);
  s.macro.options.rho_scale = ck.get<double>(ma, "/macro", "rho_scale", 1.0);
  s.macro.radial_points = ck.get<int>(ma, "/macro", "radial_points", 4000);
  s.macro.radial_extent = ck.get<double>(ma, "/macro", "radial_extent", 0.0);
  ck.check(s.macro.options.cells >= 2, "/macro/cells: must be >= 2");
  if (s.problem == Problem::Conductor) s.macro.options.lambda = s.scaling.lambda;

  const json hy = j.value("hypotheses", json::object());
  ck.keys(hy, "/hypotheses", {"enabled", "c", "method", "theta", "cubature_degree"});
  s.hypotheses = ck.get<bool>(hy, "/hypotheses", "enabled", true);
  s.hypothesis_c = ck.get<double>(hy, "/hypotheses", "c", 2.0);
  const std::string hm = ck.get<std::string>(hy, "/hypotheses", "method", "direct");
  ck.check(hm == "direct" || hm == "tree", "/hypotheses/method: direct or tree");
  s.hypothesis_options.method = hm == "tree" ? SumMethod::Tree : SumMethod::Direct;
  s.hypothesis_options.theta = ck.get<double>(hy, "/hypotheses", "theta", 0.4);
  s.hypothesis_options.cubature_degree = ck.get<int>(hy, "/hypotheses", "cubature_degree", 5);

  s.timings = ck.get<bool>(j, "", "timings", true);
  const json out = j.value("output", json::object());
  ck.keys(out, "/output", {"csv", "report"});
  s.csv_path = ck.get<std::string>(out, "/output", "csv", "");
  s.report_path = ck.get<std::string>(out, "/output", "report", "");
  ck.finish();
  return s;
}

Scenario load_scenario(const std::string& path) { return scenario_from_json(io::read_json_file(path)); }

json to_json(const Scenario& s) {
  json gen = {{"kind", io::generator_name(s.generator)}};
  if (s.generator == GeneratorKind::Hardcore) gen["c"] = s.hardcore_c;
  if (s.generator == GeneratorKind::Poisson) gen["epsilon"] = s.poisson_epsilon;
  return {{"name", s.name},
          {"problem", problem_name(s.problem)},
          {"generator", gen},
          {"density", io::to_json(s.density)},
          {"scaling", io::to_json(s.scaling)},
          {"source", io::to_json(s.source)},
          {"sweep", s.sweep},
          {"replicates", s.replicates},
          {"seed", s.seed},
          {"probes",
           {{"center", io::to_json(s.probes.center)},
            {"shell_radius", s.probes.shell_radius},
            {"count", s.probes.count},
            {"margin", s.probes.margin}}},
          {"micro",
           {{"method", s.micro.method == MicroMethod::Reflections ? "reflections" : "direct"},
            {"omega", s.micro.omega},
            {"max_sweeps", s.micro.max_sweeps},
            {"tol", s.micro.tol},
            {"pure_stokeslet", s.micro.pure_stokeslet}}},
          {"macro",
           {{"solver", s.macro.solver},
            {"cells", s.macro.options.cells},
            {"margin", s.macro.options.margin},
            {"tol", s.macro.options.tol},
            {"max_iter", s.macro.options.max_iter},
            {"rho_scale", s.macro.options.rho_scale},
            {"radial_points", s.macro.radial_points},
            {"radial_extent", s.macro.radial_extent}}},
          {"hypotheses",
           {{"enabled", s.hypotheses},
            {"c", s.hypothesis_c},
            {"method", s.hypothesis_options.method == SumMethod::Tree ? "tree" : "direct"},
            {"theta", s.hypothesis_options.theta},
            {"cubature_degree", s.hypothesis_options.cubature_degree}}},
          {"timings", s.timings},
          {"output", {{"csv", s.csv_path}, {"report", s.report_path}}}};
}

// ---------------------------------------------------------------- cache

std::shared_ptr<const MacroCache::Entry> MacroCache::get(const std::string& key, const std::function<Entry()>& make,
                                                         bool* hit) {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = entries_.find(key);
  if (hit) *hit = it != entries_.end();
  if (it != entries_.end()) return it->second;
  auto e = std::make_shared<const Entry>(make());
  entries_.emplace(key, e);
  return e;
}

std::size_t MacroCache::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return entries_.size();
}

// ---------------------------------------------------------------- convergence

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::vector<Vec3> fibonacci_sphere(const Vec3& c, double radius, int count) {
  std::vector<Vec3> p;
  p.reserve(count);
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / count;
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    p.push_back(c + radius * Vec3(s * std::cos(golden * i), s * std::sin(golden * i), z));
  }
  return p;
}

MacroModel macro_model(Problem p) {
  switch (p) {
    case Problem::DirichletLaplace: return MacroModel::Strange;
    case Problem::DirichletStokes: return MacroModel::Brinkman;
    case Problem::Conductor: return MacroModel::Permittivity;
  }
  return MacroModel::Strange;
}

std::string macro_key(const Scenario& s) {
  const json k = {{"model", macro_model_name(macro_model(s.problem))},
                  {"density", io::to_json(s.density)},
                  {"source", io::to_json(s.source)},
                  {"solver", s.macro.solver},
                  {"cells", s.macro.options.cells},
                  {"margin", s.macro.options.margin},
                  {"tol", s.macro.options.tol},
                  {"rho_scale", s.macro.options.rho_scale},
                  {"lambda", s.macro.options.lambda},
                  {"radial_points", s.macro.radial_points},
                  {"radial_extent", s.macro.radial_extent}};
  return k.dump();
}

}  // namespace

MacroCache::Entry solve_scenario_macro(const Scenario& s) {
  MacroCache::Entry e;
  const auto t0 = Clock::now();
  if (s.macro.solver == "radial") {
    e.radial = solve_strange_radial(s.density, s.source, s.macro.radial_extent, s.macro.radial_points,
                                    s.macro.options.rho_scale);
  } else {
    e.field = solve_volume_potential(macro_model(s.problem), s.density, s.source, s.macro.options);
  }
  e.solve_ms = ms_since(t0);
  return e;
}

Configuration scenario_configuration(const Scenario& s, std::size_t n, std::uint64_t seed) {
  if (n == 0 && s.generator != GeneratorKind::Periodic) {
    Configuration empty;
    empty.scaling = s.scaling;
    empty.generator.kind = s.generator;
    empty.generator.seed = seed;
    empty.domain = s.density.support();
    empty.support_volume = s.density.support_volume();
    return empty;
  }
  switch (s.generator) {
    case GeneratorKind::Periodic:
      return generate_periodic(static_cast<int>(std::llround(std::cbrt(static_cast<double>(n)))), s.density.support(),
                               s.scaling);
    case GeneratorKind::Iid: return generate_iid(n, s.density, seed, s.scaling);
    case GeneratorKind::Hardcore: return generate_hardcore(n, s.density, s.hardcore_c, seed, s.scaling);
    case GeneratorKind::Poisson: {
      const double eps = s.poisson_epsilon;
      const double lambda0 = static_cast<double>(n) * eps * eps * eps / s.density.support_volume();
      return generate_poisson(lambda0, s.density.support(), eps, seed, s.scaling);
    }
    case GeneratorKind::Explicit: break;
  }
  fail(ErrorCode::InvalidArgument, "explicit configurations cannot be generated");
}

namespace {

double rel_rms(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

double rel_rms(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]).squaredNorm();
    den += b[i].squaredNorm();
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

void run_replicate(const Scenario& s, const MacroCache::Entry& macro, std::size_t n, int rep, ConvergenceRow& row) {
  row.replicate = rep;
  row.seed = s.seed + static_cast<std::uint64_t>(rep);
  const Configuration cfg = scenario_configuration(s, n, row.seed);
  row.n = cfg.size();
  row.radius = cfg.radius;
  row.lambda = cfg.size() > 0 ? cfg.volume_fraction() : 0.0;

  if (s.hypotheses && cfg.size() >= 2) {
    const HypothesisReport h = hypothesis_report(cfg, s.density, s.hypothesis_c, s.hypothesis_options);
    row.d_n = h.h1.d_n;
    row.h1_margin = h.h1.h1_margin;
    if (h.h2) row.h2 = h.h2->value;
    if (h.h2prime) row.h2prime = h.h2prime->value;
    row.h2sharp = h.h2sharp;
    row.h2prime_sharp = h.h2prime_sharp;
    row.weaksep_gap = h.weaksep_gap;
    if (h.a2) row.a2 = h.a2->value;
  } else {
    const H1Result h = h1_check(cfg, s.hypothesis_c);
    row.d_n = h.d_n;
    row.h1_margin = h.h1_margin;
  }

  const Background bg = Background::of(s.source);
  auto t0 = Clock::now();
  const MicroSolution sol = solve_micro(s.problem, cfg, bg, s.micro);
  row.t_micro_ms = ms_since(t0);

  std::vector<Vec3> probes;
  for (const Vec3& p : fibonacci_sphere(s.probes.center, s.probes.shell_radius, s.probes.count)) {
    bool near = false;
    for (const Vec3& x : cfg.centers)
      if ((p - x).norm() < 2.0 * s.probes.margin * cfg.radius) {
        near = true;
        break;
      }
    if (near) {
      ++row.probes_excluded;
    } else {
      probes.push_back(p);
    }
  }
  row.probes_used = static_cast<int>(probes.size());
  if (probes.empty()) fail(ErrorCode::Domain, "every probe was excluded");

  const double nr = static_cast<double>(cfg.size()) * cfg.radius;
  if (s.problem == Problem::DirichletStokes) {
    const auto un = sol.evaluate_velocity(probes);
    const auto u = macro.field->evaluate_velocity(probes);
    std::vector<Vec3> u0(probes.size());
    for (std::size_t i = 0; i < probes.size(); ++i) u0[i] = s.source.stokes_potential(probes[i]);
    row.e_n = rel_rms(un, u);
    row.e_unscreened = rel_rms(un, u0);
    if (cfg.size() > 0) {
      const auto uc = macro.field->evaluate_velocity(cfg.centers);
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < cfg.size(); ++i) {
        num -= sol.vectors[i].dot(uc[i]);
        den += uc[i].squaredNorm();
      }
      row.normalized_charge = num / (nr * den / static_cast<double>(cfg.size()));
    }
  } else {
    const auto un = sol.evaluate(probes);
    std::vector<double> u, u0(probes.size());
    if (macro.radial) {
      for (const Vec3& p : probes) u.push_back((*macro.radial)(p));
    } else {
      u = macro.field->evaluate(probes);
    }
    for (std::size_t i = 0; i < probes.size(); ++i) u0[i] = s.source.potential(probes[i]);
    row.e_n = rel_rms(un, u);
    row.e_unscreened = rel_rms(un, u0);
    if (cfg.size() > 0 && s.problem == Problem::DirichletLaplace) {
      std::vector<double> uc;
      if (macro.radial) {
        for (const Vec3& x : cfg.centers) uc.push_back((*macro.radial)(x));
      } else {
        uc = macro.field->evaluate(cfg.centers);
      }
      double q = 0.0, mean = 0.0;
      for (std::size_t i = 0; i < cfg.size(); ++i) {
        q -= sol.charges[i];
        mean += uc[i];
      }
      row.normalized_charge = q / (nr * mean / static_cast<double>(cfg.size()));
    } else if (cfg.size() > 0) {
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < cfg.size(); ++i) {
        const Vec3 e = s.source.potential_gradient(cfg.centers[i]);
        num += sol.vectors[i].dot(e);
        den += e.squaredNorm();
      }
      const double r3 = cfg.radius * cfg.radius * cfg.radius;
      row.normalized_charge = num / (static_cast<double>(cfg.size()) * r3 * den / static_cast<double>(cfg.size()));
    }
  }
}

std::string fmt(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : ""; }

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

std::optional<RateFit> fit_column(const ConvergenceReport& r, double ConvergenceRow::*column) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& [n, e] : r.mean_by_n(column))
    if (e > 0.0) pts.emplace_back(static_cast<double>(n), e);
  if (pts.size() < 3) return std::nullopt;
  return estimate_rate(pts);
}

}  // namespace

ConvergenceReport run_convergence(const Scenario& s, MacroCache* cache) {
  MacroCache local;
  MacroCache& c = cache ? *cache : local;
  ConvergenceReport report;
  report.scenario = s.name;
  bool hit = false;
  double macro_ms = 0.0;
  std::shared_ptr<const MacroCache::Entry> macro;
  try {
    macro = c.get(macro_key(s), [&] { return solve_scenario_macro(s); }, &hit);
    macro_ms = hit ? 0.0 : macro->solve_ms;
  } catch (const std::exception& e) {
    ConvergenceRow row;
    row.problem = problem_name(s.problem);
    row.status = std::string("macro solve failed: ") + e.what();
    report.rows.push_back(row);
    report.partial = true;
    return report;
  }

  for (std::size_t k = 0; k < s.sweep.size(); ++k) {
    const std::size_t n = s.sweep[k];
    std::vector<ConvergenceRow> rows(s.replicates);
    for (int rep = 0; rep < s.replicates; ++rep) {
      rows[rep].problem = problem_name(s.problem);
      rows[rep].n = rows[rep].target_n = n;
      rows[rep].sweep_index = k;
    }
#pragma omp parallel for schedule(dynamic, 1)
    for (int rep = 0; rep < s.replicates; ++rep) {
      try {
        run_replicate(s, *macro, n, rep, rows[rep]);
      } catch (const std::exception& e) {
        rows[rep].replicate = rep;
        rows[rep].seed = s.seed + static_cast<std::uint64_t>(rep);
        rows[rep].status = std::string("error: ") + e.what();
      }
    }
    for (auto& r : rows) {
      if (r.status != "ok") report.partial = true;
      if (!s.timings) {
        r.t_micro_ms = 0.0;
        r.t_macro_ms = 0.0;
      } else {
        r.t_macro_ms = macro_ms;
      }
      report.rows.push_back(std::move(r));
    }
    macro_ms = 0.0;
  }
  report.rate = fit_column(report, &ConvergenceRow::e_n);
  report.rate_unscreened = fit_column(report, &ConvergenceRow::e_unscreened);
  return report;
}

std::vector<std::pair<std::size_t, double>> ConvergenceReport::mean_by_n(double ConvergenceRow::*column) const {
  std::map<std::size_t, std::pair<double, int>> acc;  // sweep index -> (sum, count)
  std::map<std::size_t, std::size_t> target;
  for (const auto& r : rows) {
    if (r.status != "ok") continue;
    auto& a = acc[r.sweep_index];
    a.first += r.*column;
    ++a.second;
    target[r.sweep_index] = r.target_n;
  }
  std::vector<std::pair<std::size_t, double>> out;
  for (const auto& [k, a] : acc) out.emplace_back(target[k], a.first / a.second);
  return out;
}

std::string ConvergenceReport::csv_header() {
  return "problem,n,lambda,replicate,seed,radius,d_n,h1_margin,h2,h2prime,h2sharp,h2prime_sharp,weaksep_gap,a2,"
         "probes_used,probes_excluded,e_n,e_unscreened,normalized_charge,t_micro_ms,t_macro_ms,status";
}

std::string ConvergenceReport::csv() const {
  std::ostringstream os;
  os << csv_header() << '\n';
  for (const auto& r : rows) {
    os << r.problem << ',' << r.n << ',' << fmt(r.lambda) << ',' << r.replicate << ',' << r.seed << ','
       << fmt(r.radius) << ',' << fmt(r.d_n) << ',' << fmt(r.h1_margin) << ',' << fmt(r.h2) << ',' << fmt(r.h2prime)
       << ',' << fmt(r.h2sharp) << ',' << fmt(r.h2prime_sharp) << ',' << fmt(r.weaksep_gap) << ',' << fmt(r.a2)
       << ',' << r.probes_used << ',' << r.probes_excluded << ',' << fmt(r.e_n) << ',' << fmt(r.e_unscreened)
       << ',' << fmt(r.normalized_charge) << ',' << fmt(r.t_micro_ms) << ',' << fmt(r.t_macro_ms) << ','
       << csv_quote(r.status) << '\n';
  }
  return os.str();
}

json ConvergenceReport::to_json() const {
  auto rate_json = [](const std::optional<RateFit>& f) -> json {
    if (!f) return nullptr;
    return {{"slope", f->slope}, {"halfwidth", f->halfwidth}, {"intercept", f->intercept}, {"points", f->points}};
  };
  json means = json::array();
  for (const auto& [n, e] : mean_by_n(&ConvergenceRow::e_n)) means.push_back({{"n", n}, {"e_n", e}});
  return {{"scenario", scenario},
          {"rows", rows.size()},
          {"partial", partial},
          {"mean_e_n", means},
          {"rate", rate_json(rate)},
          {"rate_unscreened", rate_json(rate_unscreened)}};
}

RateFit estimate_rate(const std::vector<std::pair<double, double>>& points) {
  require(points.size() >= 3, "rate fit needs at least 3 points");
  const double m = static_cast<double>(points.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& [n, e] : points) {
    require(n > 0.0, "rate fit needs positive n");
    if (!(e > 0.0)) fail(ErrorCode::Domain, "rate fit needs positive errors, got " + fmt(e));
    sx += std::log(n);
    sy += std::log(e);
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [n, e] : points) {
    sxx += (std::log(n) - mx) * (std::log(n) - mx);
    sxy += (std::log(n) - mx) * (std::log(e) - my);
  }
  require(sxx > 0.0, "rate fit needs at least two distinct n");
  RateFit f;
  f.points = points.size();
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (const auto& [n, e] : points) {
    const double r = std::log(e) - f.intercept - f.slope * std::log(n);
    sse += r * r;
  }
  const double se = std::sqrt(sse / (m - 2.0) / sxx);
  const boost::math::students_t t(m - 2.0);
  f.halfwidth = boost::math::quantile(boost::math::complement(t, 0.025)) * se;
  return f;
}

// ---------------------------------------------------------------- bench

std::vector<BenchRow> bench_kernel_sum(const std::vector<std::size_t>& ns, const std::vector<double>& thetas,
                                       const BenchOptions& opt) {
  std::vector<BenchRow> rows;
  for (std::size_t n : ns) {
    require(n >= 2, "bench needs n >= 2");
    CounterRng rng(opt.seed, n);
    std::vector<Vec3> pts(n);
    for (auto& p : pts) p = Vec3(rng.uniform(), rng.uniform(), rng.uniform());
    const std::vector<double> w(n, 1.0 / static_cast<double>(n));

    const std::size_t ns_err = std::min(n, opt.error_samples);
    std::vector<Vec3> sample(ns_err);
    SumOptions sub;
    sub.exclude.resize(ns_err);
    std::vector<std::size_t> idx(ns_err);
    for (std::size_t k = 0; k < ns_err; ++k) {
      idx[k] = k * n / ns_err;
      sample[k] = pts[idx[k]];
      sub.exclude[k] = idx[k];
    }
    const auto ref = kernel_sum(LaplaceK{}, sample, pts, w, sub);

    std::optional<double> t_direct;
    if (n <= opt.direct_cutoff) {
      SumOptions d;
      d.exclude_self = true;
      double best = 1e300;
      for (int r = 0; r < opt.repeats; ++r) {
        const auto t0 = Clock::now();
        const auto out = kernel_sum(LaplaceK{}, pts, pts, w, d);
        best = std::min(best, ms_since(t0));
        (void)out;
      }
      t_direct = best;
    }
    for (double theta : thetas) {
      SumOptions t;
      t.method = SumMethod::Tree;
      t.theta = theta;
      t.exclude_self = true;
      double best = 1e300;
      std::vector<double> out;
      for (int r = 0; r < opt.repeats; ++r) {
        const auto t0 = Clock::now();
        out = kernel_sum(LaplaceK{}, pts, pts, w, t);
        best = std::min(best, ms_since(t0));
      }
      BenchRow row;
      row.n = n;
      row.theta = theta;
      row.t_direct_ms = t_direct;
      row.t_tree_ms = best;
      if (t_direct) row.speedup = *t_direct / best;
      for (std::size_t k = 0; k < ns_err; ++k)
        row.max_rel_error = std::max(row.max_rel_error, std::abs(out[idx[k]] - ref[k]) / std::abs(ref[k]));
      rows.push_back(row);
    }
  }
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os << "n,theta,t_direct_ms,t_tree_ms,speedup,max_rel_error\n";
  for (const auto& r : rows)
    os << r.n << ',' << fmt(r.theta) << ',' << fmt(r.t_direct_ms) << ',' << fmt(r.t_tree_ms) << ','
       << fmt(r.speedup) << ',' << fmt(r.max_rel_error) << '\n';
  return os.str();
}

}  // namespace effmed
