// effmed-cli: command-line front end over the C API.

#include "effmed/effmed.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kPartial = 8;

struct Failure : std::runtime_error {
  int code;
  Failure(int c, const std::string& m) : std::runtime_error(m), code(c) {}
};

void check(effmed_status st, const std::string& stage) {
  if (st != EFFMED_OK)
    throw Failure(static_cast<int>(st), stage + ": " + effmed_status_name(st) + ": " + effmed_last_error());
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Scenario = std::unique_ptr<effmed_scenario, Deleter<effmed_scenario, effmed_scenario_free>>;
using Config = std::unique_ptr<effmed_config, Deleter<effmed_config, effmed_config_free>>;
using Micro = std::unique_ptr<effmed_micro, Deleter<effmed_micro, effmed_micro_free>>;
using Field = std::unique_ptr<effmed_field, Deleter<effmed_field, effmed_field_free>>;
using Report = std::unique_ptr<effmed_report, Deleter<effmed_report, effmed_report_free>>;

std::string take(char* s) {
  std::string out(s ? s : "");
  effmed_string_free(s);
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure(EFFMED_ERR_IO, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Failure(EFFMED_ERR_IO, "cannot write '" + path.string() + "'");
  std::cerr << "wrote " << path.string() << "\n";
}

struct Common {
  std::string scenario;
  std::string out = ".";
  int threads = 0;
  long long seed = -1;
};

Scenario load(const Common& c) {
  if (c.scenario.empty()) throw Failure(EFFMED_ERR_INVALID_ARGUMENT, "--scenario is required");
  effmed_scenario* s = nullptr;
  check(effmed_scenario_load(c.scenario.c_str(), &s), "scenario");
  Scenario owned(s);
  if (c.seed >= 0) check(effmed_scenario_set_seed(s, static_cast<uint64_t>(c.seed)), "seed");
  return owned;
}

/// "x,y,z" rows; blank lines, '#' comments and a non-numeric header are skipped.
std::vector<double> read_points(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<double> xyz;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    for (char& ch : line)
      if (ch == ',' || ch == ';' || ch == '\t') ch = ' ';
    std::istringstream row(line);
    double v[3];
    if (!(row >> v[0] >> v[1] >> v[2])) {
      if (xyz.empty() && lineno == 1) continue;
      throw Failure(EFFMED_ERR_INVALID_ARGUMENT, path + ":" + std::to_string(lineno) + ": expected x,y,z");
    }
    xyz.insert(xyz.end(), v, v + 3);
  }
  return xyz;
}

std::string field_csv(const std::vector<double>& xyz, const std::vector<double>& values, int comps) {
  std::ostringstream out;
  out.precision(12);
  out << (comps == 1 ? "x,y,z,value\n" : "x,y,z,ux,uy,uz\n");
  const std::size_t n = xyz.size() / 3;
  for (std::size_t i = 0; i < n; ++i) {
    out << xyz[3 * i] << ',' << xyz[3 * i + 1] << ',' << xyz[3 * i + 2];
    for (int a = 0; a < comps; ++a) out << ',' << values[comps * i + a];
    out << '\n';
  }
  return out.str();
}

void flatten(const json& j, const std::string& prefix, std::ostringstream& out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
  } else if (j.is_number() || j.is_boolean()) {
    out << prefix << ',' << j.dump() << '\n';
  } else if (j.is_null()) {
    out << prefix << ",\n";
  }
}

int cmd_generate(const Common& c, const std::vector<std::size_t>& only_n, int only_rep) {
  Scenario s = load(c);
  std::vector<std::size_t> ns = only_n;
  if (ns.empty())
    for (std::size_t k = 0; k < effmed_scenario_sweep_count(s.get()); ++k) ns.push_back(effmed_scenario_sweep_value(s.get(), k));
  const int reps = effmed_scenario_replicates(s.get());
  for (std::size_t n : ns) {
    for (int r = 0; r < reps; ++r) {
      if (only_rep >= 0 && r != only_rep) continue;
      effmed_config* cfg = nullptr;
      check(effmed_config_generate(s.get(), n, r, &cfg), "generate n=" + std::to_string(n));
      Config owned(cfg);
      char* text = nullptr;
      check(effmed_config_to_json(cfg, &text), "serialize");
      write_file(fs::path(c.out) / ("config_n" + std::to_string(n) + "_r" + std::to_string(r) + ".json"), take(text));
    }
  }
  return 0;
}

Config load_config(const std::string& path) {
  effmed_config* cfg = nullptr;
  check(effmed_config_parse(read_file(path).c_str(), &cfg), "configuration " + path);
  return Config(cfg);
}

int cmd_hypothesis(const Common& c, const std::string& config, std::string density, double c1) {
  Config cfg = load_config(config);
  if (density.empty() && !c.scenario.empty()) {
    Scenario s = load(c);
    char* text = nullptr;
    check(effmed_scenario_to_json(s.get(), &text), "scenario");
    density = json::parse(take(text)).at("density").dump();
  } else if (density.empty()) {
    density = "unit_cube";
  } else if (density != "unit_cube" && density != "unit_ball" && fs::exists(density)) {
    density = read_file(density);
  }
  char* text = nullptr;
  check(effmed_hypothesis_report(cfg.get(), density.c_str(), c1, &text), "hypotheses");
  const std::string report = take(text);
  write_file(fs::path(c.out) / "hypotheses.json", report);
  std::ostringstream csv;
  csv << "functional,value\n";
  flatten(json::parse(report), "", csv);
  write_file(fs::path(c.out) / "hypotheses.csv", csv.str());
  return 0;
}

int cmd_solve_micro(const Common& c, const std::string& config, const std::string& points) {
  Scenario s = load(c);
  Config cfg = load_config(config);
  effmed_micro* m = nullptr;
  check(effmed_micro_solve(s.get(), cfg.get(), &m), "micro solve");
  Micro owned(m);
  char* text = nullptr;
  check(effmed_micro_to_json(m, &text), "serialize");
  write_file(fs::path(c.out) / "micro.json", take(text));
  if (!points.empty()) {
    const std::vector<double> xyz = read_points(points);
    const int comps = effmed_micro_components(m);
    std::vector<double> v(comps * xyz.size() / 3);
    check(effmed_micro_evaluate(m, xyz.size() / 3, xyz.data(), v.data()), "micro evaluate");
    write_file(fs::path(c.out) / "micro_field.csv", field_csv(xyz, v, comps));
  }
  return 0;
}

void evaluate_field(effmed_field* f, const std::string& points, const fs::path& out) {
  const std::vector<double> xyz = read_points(points);
  const int comps = effmed_field_components(f);
  std::vector<double> v(comps * xyz.size() / 3);
  check(effmed_field_evaluate(f, xyz.size() / 3, xyz.data(), v.data()), "field evaluate");
  write_file(out, field_csv(xyz, v, comps));
}

int cmd_solve_macro(const Common& c, const std::string& points) {
  Scenario s = load(c);
  effmed_field* f = nullptr;
  check(effmed_field_solve(s.get(), &f), "macro solve");
  Field owned(f);
  char* text = nullptr;
  check(effmed_field_to_json(f, &text), "serialize");
  write_file(fs::path(c.out) / "field.json", take(text));
  if (!points.empty()) evaluate_field(f, points, fs::path(c.out) / "field_values.csv");
  return 0;
}

int cmd_evaluate(const Common& c, const std::string& field, const std::string& points) {
  effmed_field* f = nullptr;
  check(effmed_field_parse(read_file(field).c_str(), &f), "field " + field);
  Field owned(f);
  evaluate_field(f, points, fs::path(c.out) / "field_values.csv");
  return 0;
}

int cmd_converge(const Common& c) {
  Scenario s = load(c);
  effmed_report* r = nullptr;
  check(effmed_converge(s.get(), &r), "converge");
  Report owned(r);
  char* csv = nullptr;
  check(effmed_report_csv(r, &csv), "csv");
  char* js = nullptr;
  check(effmed_report_to_json(r, &js), "report");
  const std::string csv_name = *effmed_scenario_csv_path(s.get()) ? effmed_scenario_csv_path(s.get()) : "convergence.csv";
  const std::string rep_name = *effmed_scenario_report_path(s.get()) ? effmed_scenario_report_path(s.get()) : "report.json";
  write_file(fs::path(c.out) / csv_name, take(csv));
  write_file(fs::path(c.out) / rep_name, take(js));
  if (effmed_report_partial(r)) {
    std::cerr << "error: some sweep stages failed; see the status column\n";
    return kPartial;
  }
  return 0;
}

int cmd_bench(const Common& c, const std::vector<std::size_t>& ns, const std::vector<double>& thetas,
              std::size_t cutoff, int repeats) {
  char* csv = nullptr;
  const uint64_t seed = c.seed >= 0 ? static_cast<uint64_t>(c.seed) : 11;
  check(effmed_bench(ns.data(), ns.size(), thetas.data(), thetas.size(), cutoff, repeats, seed, &csv), "bench");
  const std::string text = take(csv);
  std::cout << text;
  write_file(fs::path(c.out) / "bench.csv", text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Homogenization experiments for dilute clouds of small spheres"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub, bool needs_scenario) {
    auto* opt = sub->add_option("--scenario", common.scenario, "scenario JSON file");
    if (needs_scenario) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--out", common.out, "output directory")->capture_default_str();
    sub->add_option("--threads", common.threads, "OpenMP threads (0 = default)");
    sub->add_option("--seed", common.seed, "base seed, overrides the scenario");
  };

  std::vector<std::size_t> gen_n;
  int gen_rep = -1;
  auto* gen = app.add_subcommand("generate", "write configurations for the scenario sweep");
  add_common(gen, true);
  gen->add_option("--n", gen_n, "sweep values to generate (default: all)");
  gen->add_option("--replicate", gen_rep, "single replicate index (default: all)");

  std::string config, density, points, field;
  double c1 = 2.0;
  auto* hyp = app.add_subcommand("hypothesis", "evaluate the separation hypotheses of a configuration");
  add_common(hyp, false);
  hyp->add_option("--config", config, "configuration JSON")->required()->check(CLI::ExistingFile);
  hyp->add_option("--density", density, "unit_cube, unit_ball or a density JSON file");
  hyp->add_option("--c", c1, "constant of the minimal-distance check")->capture_default_str();

  auto* micro = app.add_subcommand("solve-micro", "solve the perforated problem for one configuration");
  add_common(micro, true);
  micro->add_option("--config", config, "configuration JSON")->required()->check(CLI::ExistingFile);
  micro->add_option("--points", points, "CSV of x,y,z sample points")->check(CLI::ExistingFile);

  auto* macro = app.add_subcommand("solve-macro", "solve the effective problem");
  add_common(macro, true);
  macro->add_option("--points", points, "CSV of x,y,z sample points")->check(CLI::ExistingFile);

  auto* eval = app.add_subcommand("evaluate", "evaluate a saved effective field at points");
  add_common(eval, false);
  eval->add_option("--field", field, "field JSON from solve-macro")->required()->check(CLI::ExistingFile);
  eval->add_option("--points", points, "CSV of x,y,z")->required()->check(CLI::ExistingFile);

  auto* conv = app.add_subcommand("converge", "run the convergence sweep");
  add_common(conv, true);

  std::vector<std::size_t> bench_n = {5000, 10000, 20000};
  std::vector<double> bench_theta = {0.0, 0.3, 0.4, 0.6};
  std::size_t cutoff = 0;
  int repeats = 0;
  auto* bench = app.add_subcommand("bench", "time tree against direct kernel sums");
  add_common(bench, false);
  bench->add_option("--n", bench_n, "point counts")->capture_default_str();
  bench->add_option("--theta", bench_theta, "opening angles")->capture_default_str();
  bench->add_option("--cutoff", cutoff, "largest n timed directly (0 = default)");
  bench->add_option("--repeats", repeats, "best-of repeats (0 = default)");

  CLI11_PARSE(app, argc, argv);

  try {
    check(effmed_set_threads(common.threads), "threads");
    if (*gen) return cmd_generate(common, gen_n, gen_rep);
    if (*hyp) return cmd_hypothesis(common, config, density, c1);
    if (*micro) return cmd_solve_micro(common, config, points);
    if (*macro) return cmd_solve_macro(common, points);
    if (*eval) return cmd_evaluate(common, field, points);
    if (*conv) return cmd_converge(common);
    if (*bench) return cmd_bench(common, bench_n, bench_theta, cutoff, repeats);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.what() << "\n";
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return EFFMED_ERR_INTERNAL;
  }
  return 0;
}
