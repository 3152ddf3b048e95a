#include "effmed/effmed.h"

#include "effmed/harness.hpp"

#include <omp.h>

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

struct effmed_scenario {
  effmed::Scenario s;
};
struct effmed_config {
  effmed::Configuration c;
};
struct effmed_micro {
  effmed::MicroSolution m;
};
struct effmed_field {
  std::optional<effmed::EffectiveField> field;
  std::optional<effmed::RadialProfile> radial;
};
struct effmed_report {
  effmed::ConvergenceReport r;
};

namespace {

using effmed::io::json;

thread_local std::string last_error;

template <class F>
effmed_status guarded(F&& f) {
  try {
    f();
    last_error.clear();
    return EFFMED_OK;
  } catch (const effmed::Error& e) {
    last_error = e.what();
    return static_cast<effmed_status>(e.code());
  } catch (const json::exception& e) {
    last_error = e.what();
    return EFFMED_ERR_INVALID_ARGUMENT;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return EFFMED_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return EFFMED_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) effmed::fail(effmed::ErrorCode::InvalidArgument, std::string(what) + " is null");
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::vector<effmed::Vec3> points_of(std::size_t count, const double* xyz) {
  std::vector<effmed::Vec3> p(count);
  for (std::size_t i = 0; i < count; ++i) p[i] = effmed::Vec3(xyz[3 * i], xyz[3 * i + 1], xyz[3 * i + 2]);
  return p;
}

effmed::Density density_arg(const char* text) {
  const std::string t(text);
  if (t == "unit_cube") return effmed::Density::uniform_box(effmed::Vec3::Zero(), effmed::Vec3::Ones());
  if (t == "unit_ball") return effmed::Density::uniform_ball(effmed::Vec3::Zero(), 1.0);
  return effmed::io::density_from_json(json::parse(t));
}

}  // namespace

extern "C" {

const char* effmed_version(void) { return "1.0.0"; }

const char* effmed_status_name(effmed_status s) {
  switch (s) {
    case EFFMED_OK: return "ok";
    case EFFMED_ERR_INVALID_ARGUMENT: return "invalid argument";
    case EFFMED_ERR_DOMAIN: return "domain error";
    case EFFMED_ERR_SINGULAR: return "singular system";
    case EFFMED_ERR_NOT_CONVERGED: return "not converged";
    case EFFMED_ERR_SATURATED: return "saturated";
    case EFFMED_ERR_IO: return "i/o error";
    case EFFMED_ERR_INTERNAL: return "internal error";
  }
  return "unknown";
}

const char* effmed_last_error(void) { return last_error.c_str(); }

void effmed_string_free(char* s) { std::free(s); }

effmed_status effmed_set_threads(int k) {
  return guarded([&] {
    if (k > 0) omp_set_num_threads(k);
  });
}

effmed_status effmed_scenario_load(const char* path, effmed_scenario** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new effmed_scenario{effmed::load_scenario(path)};
  });
}

effmed_status effmed_scenario_parse(const char* text, effmed_scenario** out) {
  return guarded([&] {
    need(text, "json");
    need(out, "out");
    *out = new effmed_scenario{effmed::scenario_from_json(json::parse(text))};
  });
}

effmed_status effmed_scenario_to_json(const effmed_scenario* s, char** out) {
  return guarded([&] {
    need(s, "scenario");
    need(out, "out");
    *out = dup(effmed::to_json(s->s).dump(2));
  });
}

effmed_status effmed_scenario_set_seed(effmed_scenario* s, uint64_t seed) {
  return guarded([&] {
    need(s, "scenario");
    s->s.seed = seed;
  });
}

size_t effmed_scenario_sweep_count(const effmed_scenario* s) { return s ? s->s.sweep.size() : 0; }

size_t effmed_scenario_sweep_value(const effmed_scenario* s, size_t k) {
  return s && k < s->s.sweep.size() ? s->s.sweep[k] : 0;
}

int effmed_scenario_replicates(const effmed_scenario* s) { return s ? s->s.replicates : 0; }

const char* effmed_scenario_csv_path(const effmed_scenario* s) { return s ? s->s.csv_path.c_str() : ""; }

const char* effmed_scenario_report_path(const effmed_scenario* s) { return s ? s->s.report_path.c_str() : ""; }

void effmed_scenario_free(effmed_scenario* s) { delete s; }

effmed_status effmed_config_generate(const effmed_scenario* s, size_t n, int replicate, effmed_config** out) {
  return guarded([&] {
    need(s, "scenario");
    need(out, "out");
    effmed::require(replicate >= 0, "replicate must be >= 0");
    *out = new effmed_config{effmed::scenario_configuration(s->s, n, s->s.seed + static_cast<uint64_t>(replicate))};
  });
}

effmed_status effmed_config_parse(const char* text, effmed_config** out) {
  return guarded([&] {
    need(text, "json");
    need(out, "out");
    *out = new effmed_config{effmed::io::configuration_from_json(json::parse(text))};
  });
}

effmed_status effmed_config_to_json(const effmed_config* c, char** out) {
  return guarded([&] {
    need(c, "configuration");
    need(out, "out");
    *out = dup(effmed::io::to_json(c->c).dump(2));
  });
}

size_t effmed_config_count(const effmed_config* c) { return c ? c->c.size() : 0; }

double effmed_config_radius(const effmed_config* c) { return c ? c->c.radius : 0.0; }

effmed_status effmed_config_centers(const effmed_config* c, double* xyz) {
  return guarded([&] {
    need(c, "configuration");
    need(xyz, "xyz");
    for (std::size_t i = 0; i < c->c.size(); ++i)
      for (int a = 0; a < 3; ++a) xyz[3 * i + a] = c->c.centers[i][a];
  });
}

void effmed_config_free(effmed_config* c) { delete c; }

effmed_status effmed_hypothesis_report(const effmed_config* c, const char* density_json, double c1, char** out_json) {
  return guarded([&] {
    need(c, "configuration");
    need(density_json, "density");
    need(out_json, "out");
    const effmed::HypothesisReport r = effmed::hypothesis_report(c->c, density_arg(density_json), c1);
    *out_json = dup(effmed::io::to_json(r).dump(2));
  });
}

effmed_status effmed_micro_solve(const effmed_scenario* s, const effmed_config* c, effmed_micro** out) {
  return guarded([&] {
    need(s, "scenario");
    need(c, "configuration");
    need(out, "out");
    *out = new effmed_micro{
        effmed::solve_micro(s->s.problem, c->c, effmed::Background::of(s->s.source), s->s.micro)};
  });
}

effmed_status effmed_micro_to_json(const effmed_micro* m, char** out) {
  return guarded([&] {
    need(m, "solution");
    need(out, "out");
    *out = dup(effmed::io::to_json(m->m).dump(2));
  });
}

int effmed_micro_components(const effmed_micro* m) {
  return m && m->m.problem == effmed::Problem::DirichletStokes ? 3 : 1;
}

effmed_status effmed_micro_evaluate(const effmed_micro* m, size_t count, const double* points, double* values) {
  return guarded([&] {
    need(m, "solution");
    if (count == 0) return;
    need(points, "points");
    need(values, "values");
    const auto p = points_of(count, points);
    if (m->m.problem == effmed::Problem::DirichletStokes) {
      const auto v = m->m.evaluate_velocity(p);
      for (std::size_t i = 0; i < count; ++i)
        for (int a = 0; a < 3; ++a) values[3 * i + a] = v[i][a];
    } else {
      const auto v = m->m.evaluate(p);
      std::copy(v.begin(), v.end(), values);
    }
  });
}

void effmed_micro_free(effmed_micro* m) { delete m; }

effmed_status effmed_field_solve(const effmed_scenario* s, effmed_field** out) {
  return guarded([&] {
    need(s, "scenario");
    need(out, "out");
    effmed::MacroCache::Entry e = effmed::solve_scenario_macro(s->s);
    *out = new effmed_field{std::move(e.field), std::move(e.radial)};
  });
}

effmed_status effmed_field_parse(const char* text, effmed_field** out) {
  return guarded([&] {
    need(text, "json");
    need(out, "out");
    const json j = json::parse(text);
    if (j.value("kind", "") == "radial") {
      *out = new effmed_field{std::nullopt, effmed::io::radial_profile_from_json(j)};
    } else {
      *out = new effmed_field{effmed::io::effective_field_from_json(j), std::nullopt};
    }
  });
}

effmed_status effmed_field_to_json(const effmed_field* f, char** out) {
  return guarded([&] {
    need(f, "field");
    need(out, "out");
    *out = dup(f->radial ? effmed::io::to_json(*f->radial).dump() : effmed::io::to_json(*f->field).dump());
  });
}

int effmed_field_components(const effmed_field* f) {
  return f && f->field && f->field->model == effmed::MacroModel::Brinkman ? 3 : 1;
}

effmed_status effmed_field_evaluate(const effmed_field* f, size_t count, const double* points, double* values) {
  return guarded([&] {
    need(f, "field");
    if (count == 0) return;
    need(points, "points");
    need(values, "values");
    const auto p = points_of(count, points);
    if (f->radial) {
      for (std::size_t i = 0; i < count; ++i) values[i] = (*f->radial)(p[i]);
    } else if (f->field->model == effmed::MacroModel::Brinkman) {
      const auto v = f->field->evaluate_velocity(p);
      for (std::size_t i = 0; i < count; ++i)
        for (int a = 0; a < 3; ++a) values[3 * i + a] = v[i][a];
    } else {
      const auto v = f->field->evaluate(p);
      std::copy(v.begin(), v.end(), values);
    }
  });
}

void effmed_field_free(effmed_field* f) { delete f; }

effmed_status effmed_converge(const effmed_scenario* s, effmed_report** out) {
  return guarded([&] {
    need(s, "scenario");
    need(out, "out");
    *out = new effmed_report{effmed::run_convergence(s->s)};
  });
}

effmed_status effmed_report_csv(const effmed_report* r, char** out) {
  return guarded([&] {
    need(r, "report");
    need(out, "out");
    *out = dup(r->r.csv());
  });
}

effmed_status effmed_report_to_json(const effmed_report* r, char** out) {
  return guarded([&] {
    need(r, "report");
    need(out, "out");
    *out = dup(r->r.to_json().dump(2));
  });
}

int effmed_report_partial(const effmed_report* r) { return r && r->r.partial ? 1 : 0; }

void effmed_report_free(effmed_report* r) { delete r; }

effmed_status effmed_bench(const size_t* ns, size_t n_count, const double* thetas, size_t theta_count,
                           size_t direct_cutoff, int repeats, uint64_t seed, char** csv) {
  return guarded([&] {
    need(ns, "ns");
    need(thetas, "thetas");
    need(csv, "out");
    effmed::BenchOptions o;
    if (direct_cutoff > 0) o.direct_cutoff = direct_cutoff;
    if (repeats > 0) o.repeats = repeats;
    o.seed = seed;
    const auto rows = effmed::bench_kernel_sum(std::vector<std::size_t>(ns, ns + n_count),
                                               std::vector<double>(thetas, thetas + theta_count), o);
    *csv = dup(effmed::bench_csv(rows));
  });
}

}  // extern "C"
