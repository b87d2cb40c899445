#pragma once

#include <string>

#include <json.hpp>

#include "geoflow/model.hpp"
#include "geoflow/potential.hpp"

namespace geoflow {

/// Model file (JSON). See docs/formats.md for the schema. Malformed input
/// raises ErrorCode::Schema; unsupported curvature raises PositiveCurvature.
MetricModel parse_model(const nlohmann::json& doc);
MetricModel load_model(const std::string& path);
nlohmann::json read_json_file(const std::string& path);

/// {"z": [x, y], "angle": a} on chart models, {"time": t, "reversed": b} on
/// synthetic ones.
UnitTangent parse_tangent(const MetricModel& model, const nlohmann::json& doc);
nlohmann::json tangent_json(const MetricModel& model, const UnitTangent& v);

/// "zero", "phi_u", "constant:c", "geometric:q", or an object with optional
/// id, constant, unstable_weight and bumps [[cx, cy, width, height], ...].
Potential parse_potential(const nlohmann::json& doc);

}  // namespace geoflow
