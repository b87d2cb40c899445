#include "geoflow/model_io.hpp"

#include <fstream>
#include <sstream>

#include "geoflow/errors.hpp"

namespace geoflow {

using nlohmann::json;

namespace {

[[noreturn]] void schema(const std::string& what) { throw Error(ErrorCode::Schema, what); }

double number(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc[key].is_number()) schema(std::string("expected number '") + key + "'");
  return doc[key].get<double>();
}

std::vector<double> numbers(const json& doc, std::size_t n, const std::string& what) {
  if (!doc.is_array() || doc.size() != n) schema(what + ": expected " + std::to_string(n) + " numbers");
  std::vector<double> out;
  for (const auto& x : doc) {
    if (!x.is_number()) schema(what + ": expected numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

void only_keys(const json& doc, std::initializer_list<const char*> keys, const std::string& where) {
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) schema("unknown key '" + it.key() + "' in " + where);
  }
}

MetricModel fuchsian_from(const json& doc) {
  if (!doc.contains("generators")) return make_fuchsian_bolza();
  const json& gens = doc["generators"];
  if (!gens.is_array() || gens.size() != 8) schema("generators: expected 8 entries");
  std::array<Mobius, 8> g{};
  for (std::size_t k = 0; k < 8; ++k) {
    const auto v = numbers(gens[k], 4, "generator " + std::to_string(k));
    g[k] = Mobius{{v[0], v[1]}, {v[2], v[3]}};
  }
  return make_fuchsian(g);
}

SyntheticProfile profile_from(const json& p) {
  if (!p.is_object()) schema("profile: expected an object");
  only_keys(p, {"knots", "constant", "period", "flat_core"}, "profile");
  std::optional<double> period;
  if (p.contains("period")) period = number(p, "period");
  if (p.contains("constant")) return SyntheticProfile::constant(number(p, "constant"), period);
  if (p.contains("flat_core")) {
    const json& f = p["flat_core"];
    only_keys(f, {"inner", "outer", "outer_k"}, "flat_core");
    return SyntheticProfile::flat_core(number(f, "inner"), number(f, "outer"),
                                       f.contains("outer_k") ? number(f, "outer_k") : -1.0);
  }
  if (!p.contains("knots") || !p["knots"].is_array() || p["knots"].empty())
    schema("profile: needs knots, constant or flat_core");
  std::vector<std::pair<double, double>> knots;
  for (const auto& k : p["knots"]) {
    const auto v = numbers(k, 2, "knot");
    knots.emplace_back(v[0], v[1]);
  }
  return SyntheticProfile(std::move(knots), period);
}

}  // namespace

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Schema, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Schema, path + ": " + e.what());
  }
}

MetricModel parse_model(const json& doc) {
  if (!doc.is_object()) schema("model: expected an object");
  only_keys(doc, {"kind", "generators", "bumps", "curvature_tolerance", "profile", "declared_singular", "name"},
            "model");
  if (!doc.contains("kind") || !doc["kind"].is_string()) schema("model: missing 'kind'");
  const std::string kind = doc["kind"];
  bool singular = false;
  if (doc.contains("declared_singular")) {
    if (!doc["declared_singular"].is_boolean()) schema("declared_singular: expected a boolean");
    singular = doc["declared_singular"];
  }
  MetricModel model = [&] {
    if (kind == "fuchsian") return fuchsian_from(doc);
    if (kind == "conformal") {
      std::vector<Bump> bumps;
      if (doc.contains("bumps")) {
        if (!doc["bumps"].is_array()) schema("bumps: expected an array");
        for (const auto& b : doc["bumps"]) {
          const auto v = numbers(b, 4, "bump");
          bumps.push_back({{v[0], v[1]}, v[2], v[3]});
        }
      }
      const double tol = doc.contains("curvature_tolerance") ? number(doc, "curvature_tolerance") : 1e-9;
      return make_conformal(fuchsian_from(doc), std::move(bumps), tol);
    }
    if (kind == "synthetic") {
      if (!doc.contains("profile")) schema("synthetic model needs 'profile'");
      return make_synthetic(profile_from(doc["profile"]));
    }
    schema("unknown model kind '" + kind + "'");
  }();
  return singular ? model.with_declared_singular(true) : model;
}

MetricModel load_model(const std::string& path) {
  try {
    return parse_model(read_json_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Schema, path + ": " + e.what());
  }
}

UnitTangent parse_tangent(const MetricModel& model, const json& doc) {
  if (!doc.is_object()) schema("tangent: expected an object");
  if (model.kind() == ModelKind::synthetic) {
    only_keys(doc, {"time", "reversed"}, "tangent");
    const bool reversed = doc.contains("reversed") && doc["reversed"].get<bool>();
    return UnitTangent::synthetic(doc.contains("time") ? number(doc, "time") : 0.0, reversed);
  }
  only_keys(doc, {"z", "angle"}, "tangent");
  if (!doc.contains("z")) schema("tangent: missing 'z'");
  const auto z = numbers(doc["z"], 2, "z");
  const Complex p{z[0], z[1]};
  if (std::norm(p) >= 1.0) schema("tangent: footpoint outside the unit disk");
  return model.wrap(UnitTangent::at(p, doc.contains("angle") ? number(doc, "angle") : 0.0));
}

json tangent_json(const MetricModel& model, const UnitTangent& v) {
  if (model.kind() == ModelKind::synthetic)
    return {{"time", v.synthetic_time()}, {"reversed", v.synthetic_reversed()}};
  return {{"z", {v.z.real(), v.z.imag()}}, {"angle", v.angle}};
}

Potential parse_potential(const json& doc) {
  if (doc.is_string()) {
    const std::string s = doc;
    if (s == "zero") return Potential::zero();
    if (s == "phi_u") return Potential::geometric(1.0);
    const auto colon = s.find(':');
    if (colon != std::string::npos) {
      const std::string head = s.substr(0, colon);
      double x = 0.0;
      std::istringstream in(s.substr(colon + 1));
      if (!(in >> x) || !in.eof()) schema("potential '" + s + "': bad number");
      if (head == "constant") return Potential::constant_value(x);
      if (head == "geometric") return Potential::geometric(x);
    }
    schema("unknown potential '" + s + "'");
  }
  if (!doc.is_object()) schema("potential: expected a string or an object");
  only_keys(doc, {"id", "constant", "unstable_weight", "bumps"}, "potential");
  Potential p;
  p.id = doc.contains("id") ? doc["id"].get<std::string>() : doc.dump();
  if (doc.contains("constant")) p.constant = number(doc, "constant");
  if (doc.contains("unstable_weight")) p.unstable_weight = number(doc, "unstable_weight");
  if (doc.contains("bumps")) {
    if (!doc["bumps"].is_array()) schema("potential bumps: expected an array");
    for (const auto& b : doc["bumps"]) {
      const auto v = numbers(b, 4, "potential bump");
      p.bumps.push_back({{v[0], v[1]}, v[2], v[3]});
    }
  }
  return p;
}

}  // namespace geoflow
