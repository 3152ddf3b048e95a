#include "effmed/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace effmed::io {

namespace {

template <class T>
T field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) fail(ErrorCode::InvalidArgument, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("field '") + key + "': " + e.what());
  }
}

template <class T>
T field_or(const json& j, const char* key, T fallback) {
  return j.is_object() && j.contains(key) ? field<T>(j, key) : fallback;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json functional_json(const Functional& f) {
  json terms = json::object();
  for (std::size_t k = 0; k < f.terms.size(); ++k) terms[f.term_names[k]] = f.terms[k];
  return {{"value", f.value}, {"terms", terms}};
}

}  // namespace

json to_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

Vec3 vec3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) fail(ErrorCode::InvalidArgument, "expected a 3-vector, got " + j.dump());
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json to_json(const Domain& d) {
  if (d.kind == Domain::Kind::Box) return {{"kind", "box"}, {"lo", to_json(d.lo)}, {"hi", to_json(d.hi)}};
  return {{"kind", "ball"}, {"center", to_json(d.center)}, {"radius", d.radius}};
}

Domain domain_from_json(const json& j) {
  const std::string kind = field<std::string>(j, "kind");
  if (kind == "box") return Domain::box(vec3_from_json(j.at("lo")), vec3_from_json(j.at("hi")));
  if (kind == "ball") return Domain::ball(vec3_from_json(j.at("center")), field<double>(j, "radius"));
  fail(ErrorCode::InvalidArgument, "unknown domain kind '" + kind + "'");
}

json to_json(const Density& d) {
  switch (d.kind()) {
    case Density::Kind::UniformBox:
      return {{"kind", "uniform_box"}, {"lo", to_json(d.support().lo)}, {"hi", to_json(d.support().hi)}};
    case Density::Kind::UniformBall:
      return {{"kind", "uniform_ball"}, {"center", to_json(d.support().center)}, {"radius", d.support().radius}};
    case Density::Kind::RadialProfile: {
      json t = json::array();
      for (const auto& [r, v] : d.table()) t.push_back({r, v});
      return {{"kind", "radial_profile"}, {"center", to_json(d.support().center)}, {"table", t}};
    }
  }
  return {};
}

Density density_from_json(const json& j) {
  const std::string kind = field<std::string>(j, "kind");
  if (kind == "uniform_box") return Density::uniform_box(vec3_from_json(j.at("lo")), vec3_from_json(j.at("hi")));
  if (kind == "unit_cube") return Density::uniform_box(Vec3::Zero(), Vec3::Ones());
  if (kind == "uniform_ball")
    return Density::uniform_ball(vec3_from_json(field_or<json>(j, "center", to_json(Vec3::Zero()))),
                                 field_or<double>(j, "radius", 1.0));
  if (kind == "radial_profile") {
    std::vector<std::pair<double, double>> t;
    for (const auto& row : field<json>(j, "table")) {
      if (!row.is_array() || row.size() != 2) fail(ErrorCode::InvalidArgument, "radial table rows are [r, value]");
      t.emplace_back(row[0].get<double>(), row[1].get<double>());
    }
    return Density::radial_profile(vec3_from_json(field_or<json>(j, "center", to_json(Vec3::Zero()))), std::move(t));
  }
  fail(ErrorCode::InvalidArgument, "unknown density kind '" + kind + "'");
}

json to_json(const Scaling& s) {
  switch (s.kind) {
    case ScalingKind::Reflexive: return {{"kind", "reflexive"}};
    case ScalingKind::Fraction: return {{"kind", "fraction"}, {"lambda", s.lambda}};
    case ScalingKind::Power: return {{"kind", "power"}, {"exponent", s.exponent}};
  }
  return {};
}

Scaling scaling_from_json(const json& j) {
  const std::string kind = field<std::string>(j, "kind");
  if (kind == "reflexive") return Scaling::reflexive();
  if (kind == "fraction") return Scaling::fraction(field<double>(j, "lambda"));
  if (kind == "power") return Scaling::power(field<double>(j, "exponent"));
  fail(ErrorCode::InvalidArgument, "unknown scaling kind '" + kind + "'");
}

std::string generator_name(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::Periodic: return "periodic";
    case GeneratorKind::Iid: return "iid";
    case GeneratorKind::Hardcore: return "hardcore";
    case GeneratorKind::Poisson: return "poisson";
    case GeneratorKind::Explicit: return "explicit";
  }
  return "?";
}

GeneratorKind generator_from_name(const std::string& name) {
  for (GeneratorKind k : {GeneratorKind::Periodic, GeneratorKind::Iid, GeneratorKind::Hardcore, GeneratorKind::Poisson,
                          GeneratorKind::Explicit})
    if (generator_name(k) == name) return k;
  fail(ErrorCode::InvalidArgument, "unknown generator '" + name + "'");
}

json to_json(const Configuration& c) {
  json centers = json::array();
  for (const auto& x : c.centers) centers.push_back(to_json(x));
  json gen = {{"kind", generator_name(c.generator.kind)}, {"retries", c.generator.retries}};
  switch (c.generator.kind) {
    case GeneratorKind::Periodic: gen["side"] = c.generator.side; break;
    case GeneratorKind::Hardcore: gen["c"] = c.generator.c; break;
    case GeneratorKind::Poisson:
      gen["lambda0"] = c.generator.lambda0;
      gen["epsilon"] = c.generator.epsilon;
      break;
    default: break;
  }
  return {{"n", c.size()},
          {"radius", c.radius},
          {"scaling", to_json(c.scaling)},
          {"generator", gen},
          {"seed", c.generator.seed},
          {"domain", to_json(c.domain)},
          {"support_volume", c.support_volume},
          {"volume_fraction", c.volume_fraction()},
          {"centers", centers}};
}

Configuration configuration_from_json(const json& j) {
  Configuration c;
  for (const auto& x : field<json>(j, "centers")) c.centers.push_back(vec3_from_json(x));
  if (j.contains("n") && field<std::size_t>(j, "n") != c.centers.size())
    fail(ErrorCode::InvalidArgument, "configuration n does not match the number of centers");
  c.radius = field<double>(j, "radius");
  c.scaling = scaling_from_json(field_or<json>(j, "scaling", json{{"kind", "reflexive"}}));
  const json gen = field_or<json>(j, "generator", json{{"kind", "explicit"}});
  c.generator.kind = generator_from_name(field<std::string>(gen, "kind"));
  c.generator.c = field_or<double>(gen, "c", 0.0);
  c.generator.lambda0 = field_or<double>(gen, "lambda0", 0.0);
  c.generator.epsilon = field_or<double>(gen, "epsilon", 1.0);
  c.generator.side = field_or<int>(gen, "side", 0);
  c.generator.retries = field_or<long>(gen, "retries", 0);
  c.generator.seed = field_or<std::uint64_t>(j, "seed", 0);
  c.domain = domain_from_json(field<json>(j, "domain"));
  c.support_volume = field_or<double>(j, "support_volume", c.domain.volume());
  c.validate();
  return c;
}

json to_json(const SourceField& g) {
  json bumps = json::array();
  for (const auto& b : g.bumps())
    bumps.push_back({{"center", to_json(b.center)}, {"width", b.width}, {"mass", b.mass}, {"force", to_json(b.force)}});
  return {{"bumps", bumps}};
}

SourceField source_from_json(const json& j) {
  std::vector<GaussianBump> bumps;
  for (const auto& b : field<json>(j, "bumps")) {
    GaussianBump g;
    g.center = vec3_from_json(field<json>(b, "center"));
    g.width = field<double>(b, "width");
    g.mass = field_or<double>(b, "mass", b.contains("force") ? 0.0 : 1.0);
    g.force = b.contains("force") ? vec3_from_json(b.at("force")) : Vec3::Zero();
    bumps.push_back(g);
  }
  return SourceField(std::move(bumps));
}

json to_json(const Background& b) {
  if (b.kind == Background::Kind::Source) return {{"kind", "source"}, {"source", to_json(b.source)}};
  return {{"kind", "affine"}, {"u0", b.u0}, {"gradient", to_json(b.e)}};
}

Background background_from_json(const json& j) {
  if (j.contains("bumps")) return Background::of(source_from_json(j));
  const std::string kind = field<std::string>(j, "kind");
  if (kind == "source") return Background::of(source_from_json(field<json>(j, "source")));
  if (kind == "affine") return Background::affine(field_or<double>(j, "u0", 0.0), vec3_from_json(field<json>(j, "gradient")));
  if (kind == "velocity") return Background::velocity(vec3_from_json(field<json>(j, "velocity")));
  fail(ErrorCode::InvalidArgument, "unknown background kind '" + kind + "'");
}

json to_json(const HypothesisReport& r) {
  json j = {{"n", r.n},
            {"radius", r.radius},
            {"c", r.c},
            {"h1",
             {{"d_n", finite_or_null(r.h1.d_n)},
              {"h1_margin", finite_or_null(r.h1.h1_margin)},
              {"a1_margin", finite_or_null(r.h1.a1_margin)},
              {"h1_pass", r.h1.h1_pass},
              {"a1_pass", r.h1.a1_pass},
              {"c_above_two", r.h1.c_above_two}}},
            {"h2sharp", r.h2sharp},
            {"h2prime_sharp", r.h2prime_sharp},
            {"weaksep_gap", r.weaksep_gap},
            {"cubature_degree", r.cubature_degree},
            {"method", r.method == SumMethod::Tree ? "tree" : "direct"},
            {"theta", r.theta},
            {"matrix_norm", r.matrix_norm}};
  j["h2"] = r.h2 ? functional_json(*r.h2) : json(nullptr);
  j["h2prime"] = r.h2prime ? functional_json(*r.h2prime) : json(nullptr);
  if (r.a2)
    j["a2"] = {{"value", r.a2->value},  {"grad_sup", r.a2->grad_sup},           {"lambda", r.a2->lambda},
               {"eta", r.a2->eta},      {"ratio_lambda2", r.a2->ratio_lambda2}, {"field", r.a2->field}};
  else
    j["a2"] = nullptr;
  return j;
}

json to_json(const MicroSolution& s) {
  json j = {{"problem", problem_name(s.problem)},
            {"n", s.config.size()},
            {"radius", s.config.radius},
            {"pure_stokeslet", s.pure_stokeslet},
            {"background", to_json(s.background)},
            {"diagnostics",
             {{"method", s.diagnostics.method},
              {"iterations", s.diagnostics.iterations},
              {"residual", s.diagnostics.residual},
              {"min_gap", finite_or_null(s.diagnostics.min_gap)},
              {"warnings", s.diagnostics.warnings}}}};
  if (s.problem == Problem::DirichletLaplace) {
    j["charges"] = s.charges;
  } else {
    json v = json::array();
    for (const auto& x : s.vectors) v.push_back(to_json(x));
    j[s.problem == Problem::DirichletStokes ? "forces" : "dipoles"] = v;
  }
  return j;
}

json to_json(const EffectiveField& f) {
  json j = {{"model", macro_model_name(f.model)},
            {"grid", {{"origin", to_json(f.grid.origin)}, {"h", f.grid.h}, {"dims", f.grid.dims}}},
            {"source", to_json(f.g)},
            {"rho_scale", f.rho_scale},
            {"lambda", f.lambda},
            {"coupling", f.coupling},
            {"diagnostics",
             {{"iterations", f.diagnostics.iterations},
              {"residual", f.diagnostics.residual},
              {"truncation", f.diagnostics.truncation},
              {"warnings", f.diagnostics.warnings}}}};
  std::vector<std::size_t> idx;
  for (const auto& x : f.active) {
    const Vec3 s = (x - f.grid.origin) / f.grid.h;
    idx.push_back(f.grid.index(static_cast<int>(std::lround(s[0])), static_cast<int>(std::lround(s[1])),
                               static_cast<int>(std::lround(s[2]))));
  }
  j["active"] = idx;
  if (f.model == MacroModel::Brinkman) {
    json v = json::array(), q = json::array();
    for (const auto& x : f.velocities) v.push_back(to_json(x));
    for (const auto& x : f.vcharge) q.push_back(to_json(x));
    j["velocities"] = v;
    j["weights"] = q;
  } else {
    j["values"] = f.values;
    if (f.model == MacroModel::Strange) {
      j["weights"] = f.charge;
    } else {
      json q = json::array();
      for (const auto& x : f.vcharge) q.push_back(to_json(x));
      j["weights"] = q;
    }
  }
  return j;
}

EffectiveField effective_field_from_json(const json& j) {
  EffectiveField f;
  f.model = macro_model_from_name(field<std::string>(j, "model"));
  const json g = field<json>(j, "grid");
  f.grid.origin = vec3_from_json(field<json>(g, "origin"));
  f.grid.h = field<double>(g, "h");
  f.grid.dims = field<std::array<int, 3>>(g, "dims");
  f.g = source_from_json(field<json>(j, "source"));
  f.rho_scale = field<double>(j, "rho_scale");
  f.lambda = field<double>(j, "lambda");
  f.coupling = field<double>(j, "coupling");
  const json d = field_or<json>(j, "diagnostics", json::object());
  f.diagnostics.iterations = field_or<int>(d, "iterations", 0);
  f.diagnostics.residual = field_or<double>(d, "residual", 0.0);
  f.diagnostics.truncation = field_or<double>(d, "truncation", 0.0);
  f.diagnostics.warnings = field_or<std::vector<std::string>>(d, "warnings", {});
  for (std::size_t i : field<std::vector<std::size_t>>(j, "active")) {
    require(i < f.grid.size(), "active node index out of range");
    f.active.push_back(f.grid.node(i));
  }
  const json w = field<json>(j, "weights");
  require(w.size() == f.active.size(), "weights length must equal the active node count");
  if (f.model == MacroModel::Brinkman) {
    for (const auto& v : field<json>(j, "velocities")) f.velocities.push_back(vec3_from_json(v));
    require(f.velocities.size() == f.grid.size(), "velocity count must equal the grid size");
    for (const auto& v : w) f.vcharge.push_back(vec3_from_json(v));
  } else {
    f.values = field<std::vector<double>>(j, "values");
    require(f.values.size() == f.grid.size(), "value count must equal the grid size");
    if (f.model == MacroModel::Strange) {
      f.charge = w.get<std::vector<double>>();
    } else {
      for (const auto& v : w) f.vcharge.push_back(vec3_from_json(v));
    }
  }
  return f;
}

json to_json(const RadialProfile& p) {
  return {{"kind", "radial"}, {"center", to_json(p.center)}, {"decay", p.decay}, {"r", p.r}, {"u", p.u}};
}

RadialProfile radial_profile_from_json(const json& j) {
  require(field_or<std::string>(j, "kind", "radial") == "radial", "expected a radial profile");
  RadialProfile p;
  p.center = vec3_from_json(field<json>(j, "center"));
  p.decay = field<double>(j, "decay");
  p.r = field<std::vector<double>>(j, "r");
  p.u = field<std::vector<double>>(j, "u");
  require(p.r.size() == p.u.size() && p.r.size() >= 2, "radial profile needs matching r and u tables");
  return p;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::InvalidArgument, "'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write '" + path + "'");
  out << text;
  if (!out) fail(ErrorCode::Io, "write to '" + path + "' failed");
}

}  // namespace effmed::io
