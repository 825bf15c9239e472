#include "polarfact/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "polarfact/error.hpp"

namespace polarfact::io {
namespace {

void write_number(std::string& out, double x) {
  if (!std::isfinite(x)) {
    out += "null";
    return;
  }
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", x);
  out.append(buf, static_cast<std::size_t>(n));
}

void write_value(std::string& out, const json& v, int indent, int depth) {
  const auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (v.type()) {
    case json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += json(it.key()).dump();
        out += indent < 0 ? ":" : ": ";
        write_value(out, it.value(), indent, depth + 1);
      }
      newline(depth);
      out += '}';
      return;
    }
    case json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::none_of(v.begin(), v.end(),
                                     [](const json& e) { return e.is_structured(); });
      out += '[';
      bool first = true;
      for (const auto& e : v) {
        if (!first) out += flat ? ", " : ",";
        first = false;
        if (!flat) newline(depth + 1);
        write_value(out, e, indent, depth + 1);
      }
      if (!flat) newline(depth);
      out += ']';
      return;
    }
    case json::value_t::number_float:
      write_number(out, v.get<double>());
      return;
    default:
      out += v.dump();
  }
}

[[noreturn]] void schema_error(const std::string& what) { fail(ErrorCode::ParseError, what); }

double number(const json& j, const char* what) {
  if (!j.is_number()) schema_error(std::string(what) + " must be a number");
  return j.get<double>();
}

Vector vector_from(const json& j, const char* what) {
  if (!j.is_array()) schema_error(std::string(what) + " must be an array of numbers");
  Vector v;
  v.reserve(j.size());
  for (const auto& e : j) v.push_back(number(e, what));
  return v;
}

json vector_json(const Vector& v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

}  // namespace

std::string dump(const json& value, int indent) {
  std::string out;
  write_value(out, value, indent, 0);
  if (indent >= 0) out += '\n';
  return out;
}

json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ParseError, origin + ": " + e.what());
  }
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ParseError, "cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_json(buf.str(), path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::InvalidArgument, "cannot write '" + path.string() + "'");
  out << text;
}

DiscreteMeasure measure_from_json(const json& j) {
  if (!j.is_object() || !j.contains("points") || !j["points"].is_array())
    schema_error("measure must be an object with a \"points\" array");
  DiscreteMeasure m;
  const json dim = j.value("dimension", json());
  if (dim.is_number_integer() || dim.is_number_unsigned()) {
    const auto d = dim.get<long long>();
    if (d < 1) fail(ErrorCode::DimensionMismatch, "dimension must be at least 1");
    m.dimension = static_cast<std::size_t>(d);
  } else if (!dim.is_null() && !(dim.is_string() && dim.get<std::string>() == "abstract")) {
    schema_error("dimension must be a positive integer, \"abstract\" or null");
  }
  for (const auto& p : j["points"]) {
    if (!p.is_object() || !p.contains("weight")) schema_error("each point needs a weight");
    Site site;
    if (p.contains("label")) {
      if (!p["label"].is_string()) schema_error("point labels must be strings");
      site.label = p["label"].get<std::string>();
    } else {
      site.label = "p" + std::to_string(m.sites.size());
    }
    if (p.contains("coords") && !p["coords"].is_null()) site.coords = vector_from(p["coords"], "coords");
    m.sites.push_back(std::move(site));
    m.weights.push_back(number(p["weight"], "weight"));
  }
  validate(m);
  return m;
}

json to_json(const DiscreteMeasure& measure) {
  json j;
  j["dimension"] = measure.dimension ? json(*measure.dimension) : json("abstract");
  json points = json::array();
  for (std::size_t i = 0; i < measure.size(); ++i) {
    json p;
    p["label"] = measure.sites[i].label;
    p["coords"] = measure.sites[i].coords ? vector_json(*measure.sites[i].coords) : json();
    p["weight"] = measure.weights[i];
    points.push_back(std::move(p));
  }
  j["points"] = std::move(points);
  return j;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  for (auto& f : fields) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return fields;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

}  // namespace

DiscreteMeasure measure_from_csv(std::istream& in, const std::string& origin) {
  DiscreteMeasure m;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_csv(line);
    double w = 0.0;
    if (fields.size() < 2 || !parse_double(fields.back(), w)) {
      if (m.sites.empty() && line_no == 1) continue;  // header
      fail(ErrorCode::ParseError, origin + ": line " + std::to_string(line_no) +
                                      ": expected label, coordinates, weight");
    }
    Vector coords;
    for (std::size_t k = 1; k + 1 < fields.size(); ++k) {
      double x = 0.0;
      if (!parse_double(fields[k], x))
        fail(ErrorCode::ParseError, origin + ": line " + std::to_string(line_no) + ", column " +
                                        std::to_string(k + 1) + ": '" + fields[k] + "' is not a number");
      coords.push_back(x);
    }
    if (m.sites.empty()) {
      if (!coords.empty()) m.dimension = coords.size();
    }
    m.sites.push_back({fields.front(), coords.empty() ? std::nullopt : std::optional<Vector>(coords)});
    m.weights.push_back(w);
  }
  validate(m);
  return m;
}

DiscreteMeasure load_measure(const std::filesystem::path& path) {
  if (path.extension() == ".csv") {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::ParseError, "cannot open '" + path.string() + "'");
    return measure_from_csv(in, path.string());
  }
  return measure_from_json(read_json(path));
}

SampledMap sampled_map_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object() || !j.contains("measure") || !j.contains("values"))
    schema_error("sampled map needs \"measure\" and \"values\"");
  SampledMap map;
  const json& mj = j["measure"];
  if (mj.is_string()) map.domain = load_measure(base_dir / mj.get<std::string>());
  else map.domain = measure_from_json(mj);
  if (!j["values"].is_array()) schema_error("\"values\" must be an array");
  for (const auto& v : j["values"]) {
    if (v.is_number()) map.values.push_back({v.get<double>()});
    else map.values.push_back(vector_from(v, "value"));
  }
  map.codomain_dimension = map.values.empty() ? 0 : map.values.front().size();
  validate(map);
  return map;
}

SampledMap load_sampled_map(const std::filesystem::path& path) {
  return sampled_map_from_json(read_json(path), path.parent_path());
}

json to_json(const SampledMap& map) {
  json j;
  j["measure"] = to_json(map.domain);
  json values = json::array();
  for (const auto& v : map.values) values.push_back(vector_json(v));
  j["values"] = std::move(values);
  return j;
}

json potential_to_json(std::span<const double> values) {
  json a = json::array();
  for (double x : values) a.push_back(x);
  return a;
}

std::vector<double> potential_from_json(const json& j) {
  if (j.is_object() && j.contains("psi")) return vector_from(j["psi"], "psi");
  return vector_from(j, "potential");
}

json plan_to_json(const TransportPlan& plan) {
  json a = json::array();
  for (const auto& t : plan.triplets) a.push_back({{"i", t.i}, {"j", t.j}, {"mass", t.mass}});
  return a;
}

TransportPlan plan_from_json(const json& j, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  const json& arr = j.is_object() && j.contains("plan") ? j["plan"] : j;
  if (!arr.is_array()) schema_error("plan must be an array of {i, j, mass} triplets");
  TransportPlan plan;
  plan.source_weights = mu.weights;
  plan.target_weights = nu.weights;
  for (const auto& t : arr) {
    if (!t.is_object() || !t.contains("i") || !t.contains("j") || !t.contains("mass"))
      schema_error("plan triplets need i, j and mass");
    if (!t["i"].is_number_unsigned() && !t["i"].is_number_integer())
      schema_error("triplet index i must be an integer");
    if (!t["j"].is_number_unsigned() && !t["j"].is_number_integer())
      schema_error("triplet index j must be an integer");
    const auto i = t["i"].get<long long>();
    const auto jj = t["j"].get<long long>();
    if (i < 0 || jj < 0) schema_error("triplet indices must be non-negative");
    if (static_cast<std::size_t>(i) >= mu.size() || static_cast<std::size_t>(jj) >= nu.size())
      schema_error("triplet (" + std::to_string(i) + ", " + std::to_string(jj) +
                   ") is outside the " + std::to_string(mu.size()) + " x " + std::to_string(nu.size()) +
                   " plan");
    plan.triplets.push_back(
        {static_cast<std::size_t>(i), static_cast<std::size_t>(jj), number(t["mass"], "mass")});
  }
  check_marginals(plan);
  return plan;
}

json certificate_json(double primal, double dual_value) {
  return {{"I", primal}, {"dual_value", dual_value}, {"gap", primal - dual_value}};
}

json to_json(const DualPair& duals) {
  return {{"phi_c", potential_to_json(duals.phi_c)}, {"phi", potential_to_json(duals.phi)}};
}

HeavySet heavy_from_json(const json& j) {
  HeavySet heavy;
  const json* values = &j;
  if (j.is_object()) {
    if (!j.contains("values")) schema_error("heavy designation needs \"values\"");
    heavy.tolerance = number(j.value("tolerance", json(0.0)), "tolerance");
    values = &j["values"];
  }
  if (!values->is_array()) schema_error("heavy values must be an array");
  for (const auto& v : *values) {
    if (v.is_number()) heavy.values.push_back({v.get<double>()});
    else heavy.values.push_back(vector_from(v, "heavy value"));
  }
  return heavy;
}

json to_json(const HeavySet& heavy) {
  json values = json::array();
  for (const auto& v : heavy.values) values.push_back(vector_json(v));
  return {{"tolerance", heavy.tolerance}, {"values", std::move(values)}};
}

json to_json(const MkSolution& sol) {
  json j;
  j["plan"] = plan_to_json(sol.plan);
  j["duals"] = to_json(sol.duals);
  j["certificate"] = certificate_json(sol.primal, sol.dual_value);
  j["pivots"] = sol.stats.pivots;
  return j;
}

json to_json(const PolarResult& r) {
  json j;
  j["classification"] = std::string(to_string(r.classification));
  j["plan"] = plan_to_json(r.plan);
  j["duals"] = to_json(r.duals);
  j["psi"] = potential_to_json(r.psi.psi_values);
  j["gaps"] = potential_to_json(r.gaps);
  j["certificates"] = {{"I", r.primal},
                       {"dual_value", r.dual_value},
                       {"gap", r.primal - r.dual_value},
                       {"max_fenchel_gap", r.max_gap},
                       {"conjugate_identity_error", r.conjugate_identity_error}};
  if (r.factor_map) {
    json s = json::array();
    for (std::size_t k : *r.factor_map) s.push_back(k);
    j["factor_map"] = std::move(s);
  }
  if (r.u_sharp) {
    json values = json::array();
    for (const auto& v : r.u_sharp->values) values.push_back(vector_json(v));
    j["u_sharp"] = std::move(values);
  }
  json residues = json::array();
  for (const auto& res : r.residues) residues.push_back({{"row", res.row}, {"mass", res.off_main_mass}});
  j["residues"] = std::move(residues);
  json split = json::array();
  for (std::size_t i : r.split_rows) split.push_back(i);
  j["split_rows"] = std::move(split);
  return j;
}

json to_json(const MultiplicityReport& report) {
  json atoms = json::array();
  for (const auto& a : report.atoms)
    atoms.push_back({{"value", vector_json(a.value)},
                     {"mass", a.mass},
                     {"point_count", a.point_count},
                     {"heavy", a.heavy}});
  json j;
  j["atoms"] = std::move(atoms);
  j["almost_injective"] = report.almost_injective;
  j["almost_m_to_1"] = report.almost_m_to_1 ? json(*report.almost_m_to_1) : json();
  j["max_light_count"] = report.max_light_count;
  return j;
}

json to_json(const DegeneracyReport& report) {
  return {{"degeneracy_index", report.degeneracy_index},
          {"split_index", report.split_index},
          {"zero_reduced_cost_columns", report.zero_reduced_cost_columns},
          {"support_columns", report.support_columns}};
}

}  // namespace polarfact::io
