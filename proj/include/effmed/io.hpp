#pragma once

// JSON records for the library types.

#include "effmed/geometry.hpp"
#include "effmed/hypotheses.hpp"
#include "effmed/macrosolver.hpp"
#include "effmed/microsolver.hpp"

#include <json.hpp>

#include <string>

namespace effmed::io {

using json = nlohmann::json;

json to_json(const Vec3& v);
Vec3 vec3_from_json(const json& j);

json to_json(const Domain& d);
Domain domain_from_json(const json& j);

/// {"kind": "uniform_box", "lo", "hi"} | {"kind": "uniform_ball", "center", "radius"}
/// | {"kind": "radial_profile", "center", "table": [[r, value], ...]}
json to_json(const Density& d);
Density density_from_json(const json& j);

/// {"kind": "reflexive"} | {"kind": "fraction", "lambda"} | {"kind": "power", "exponent"}
json to_json(const Scaling& s);
Scaling scaling_from_json(const json& j);

std::string generator_name(GeneratorKind k);
GeneratorKind generator_from_name(const std::string& name);

/// {n, radius, scaling, generator, seed, domain, support_volume, centers}
json to_json(const Configuration& c);
Configuration configuration_from_json(const json& j);

/// {"bumps": [{"center", "width", "mass", "force"}, ...]}
json to_json(const SourceField& g);
SourceField source_from_json(const json& j);

/// {"kind": "source", "source": {...}} | {"kind": "affine", "u0", "gradient"}
json to_json(const Background& b);
Background background_from_json(const json& j);

json to_json(const HypothesisReport& r);
json to_json(const MicroSolution& s);
/// Full record: grid, values and representation weights; round-trips.
json to_json(const EffectiveField& f);
EffectiveField effective_field_from_json(const json& j);

/// {"kind": "radial", "center", "decay", "r", "u"}
json to_json(const RadialProfile& p);
RadialProfile radial_profile_from_json(const json& j);

json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace effmed::io
