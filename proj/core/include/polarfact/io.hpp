#pragma once

// File formats: measures (JSON, CSV), sampled maps, potentials, plans with
// duality certificates, heavy-atom designations and the result reports.
// Doubles are written with 17 significant digits so that files round-trip
// bit for bit.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "polarfact/convex.hpp"
#include "polarfact/measures.hpp"
#include "polarfact/polar.hpp"
#include "polarfact/rearrangement.hpp"
#include "polarfact/transport.hpp"

namespace polarfact::io {

using json = nlohmann::json;

/// Serialises with every double printed as %.17g. Deterministic.
std::string dump(const json& value, int indent = 2);

/// Parses a JSON file; syntax errors become ParseError with line/column.
json read_json(const std::filesystem::path& path);
json parse_json(const std::string& text, const std::string& origin = "<string>");
void write_text(const std::filesystem::path& path, const std::string& text);

// {"dimension": n | "abstract" | null, "points": [{"label", "coords", "weight"}]}
DiscreteMeasure measure_from_json(const json& j);
json to_json(const DiscreteMeasure& measure);

/// One row per point: label, coord_1..coord_n, weight. A header row is
/// skipped when its last field is not numeric.
DiscreteMeasure measure_from_csv(std::istream& in, const std::string& origin = "<csv>");

/// Chooses CSV for a ".csv" extension, JSON otherwise.
DiscreteMeasure load_measure(const std::filesystem::path& path);

// {"measure": <path relative to base_dir> | <inline measure>, "values": [[..], ..]}
SampledMap sampled_map_from_json(const json& j, const std::filesystem::path& base_dir);
SampledMap load_sampled_map(const std::filesystem::path& path);
json to_json(const SampledMap& map);

/// Potentials are arrays aligned with the point order of their measure.
json potential_to_json(std::span<const double> values);
std::vector<double> potential_from_json(const json& j);

json plan_to_json(const TransportPlan& plan);
/// Triplets from {"plan": [...]} or a bare array; marginals from the measures.
TransportPlan plan_from_json(const json& j, const DiscreteMeasure& mu, const DiscreteMeasure& nu);

json certificate_json(double primal, double dual_value);
json to_json(const DualPair& duals);

/// {"tolerance": t, "values": [[..], ..]} or a bare list of values (tolerance 0).
HeavySet heavy_from_json(const json& j);
json to_json(const HeavySet& heavy);

json to_json(const MkSolution& sol);
json to_json(const PolarResult& result);
json to_json(const MultiplicityReport& report);
json to_json(const DegeneracyReport& report);

}  // namespace polarfact::io
