#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "polarfact/polarfact.hpp"

namespace polarfact::cli {
namespace {

namespace fs = std::filesystem;
using io::json;

struct RunConfig {
  std::string subcommand;
  std::string u_path;
  std::string y_path;
  std::string plan_path;
  std::string psi_path;
  std::string heavy_path;
  std::string name;
  std::string out_path;
  std::string format = "json";
  double tol = kInclusionTol;
  double cluster_tol = 0.0;
  std::uint64_t seed = 0;
  std::size_t m = 1;
  std::size_t grid = 8;
  bool oracle = false;
  bool refine_split = false;
};

/// Thrown for certification failures that are not library errors.
struct Certification {
  int code;
  std::string message;
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string vec(const Vector& v) {
  std::string s = "(";
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? ", " : "") + num(v[k]);
  return s + ")";
}

void emit(const RunConfig& cfg, std::ostream& out, const std::string& text) {
  if (cfg.out_path.empty()) out << text;
  else io::write_text(cfg.out_path, text);
}

std::string render(const RunConfig& cfg, const json& j, const std::function<std::string()>& text,
                   const std::function<std::string()>& csv) {
  if (cfg.format == "text") return text();
  if (cfg.format == "csv") return csv();
  return io::dump(j);
}

std::string plan_csv(const TransportPlan& plan) {
  std::string s = "i,j,mass\n";
  for (const auto& t : plan.triplets)
    s += std::to_string(t.i) + "," + std::to_string(t.j) + "," + num(t.mass) + "\n";
  return s;
}

std::string plan_table(const TransportPlan& plan, const SampledMap& u, const DiscreteMeasure& Y) {
  std::ostringstream s;
  s << "  x_label        y_label        mass\n";
  for (const auto& t : plan.triplets) {
    char line[256];
    std::snprintf(line, sizeof line, "  %-14s %-14s %s\n", u.domain.sites[t.i].label.c_str(),
                  Y.sites[t.j].label.c_str(), num(t.mass).c_str());
    s << line;
  }
  return s.str();
}

int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const SampledMap u = io::load_sampled_map(cfg.u_path);
  const DiscreteMeasure Y = io::load_measure(cfg.y_path);
  const CostMatrix cost = build_cost(u, Y);
  const MkSolution sol = solve_mk(cost, u.domain, Y);
  check_marginals(sol.plan);

  json j = io::to_json(sol);
  std::optional<double> oracle;
  if (cfg.oracle) {
    oracle = brute_force_mk(cost, u.domain, Y);
    j["oracle"] = {{"optimum", *oracle}, {"matches", relative_gap(sol.primal, *oracle) <= 1e-9}};
  }
  const auto text = [&] {
    std::ostringstream s;
    s << "I           " << num(sol.primal) << "\n"
      << "dual value  " << num(sol.dual_value) << "\n"
      << "gap         " << num(sol.primal - sol.dual_value) << "\n"
      << "pivots      " << sol.stats.pivots << "\n";
    if (oracle) s << "oracle      " << num(*oracle) << "\n";
    s << plan_table(sol.plan, u, Y);
    return s.str();
  };
  emit(cfg, out, render(cfg, j, text, [&] { return plan_csv(sol.plan); }));

  if (relative_gap(sol.primal, sol.dual_value) > 1e-9)
    throw Certification{kCertification, "duality gap " + num(sol.primal - sol.dual_value)};
  if (oracle && relative_gap(sol.primal, *oracle) > 1e-9)
    throw Certification{kCertification, "solver optimum " + num(sol.primal) +
                                            " disagrees with the permutation oracle " + num(*oracle)};
  err << "certified: I = " << num(sol.primal) << ", duality gap "
      << num(sol.primal - sol.dual_value) << "\n";
  return kOk;
}

int cmd_factorize(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const SampledMap u = io::load_sampled_map(cfg.u_path);
  const DiscreteMeasure Y = io::load_measure(cfg.y_path);
  const PolarResult r = polar_factorize(u, Y, {cfg.tol, true});

  const auto text = [&] {
    std::ostringstream s;
    s << "classification      " << to_string(r.classification) << "\n"
      << "I                   " << num(r.primal) << "\n"
      << "dual value          " << num(r.dual_value) << "\n"
      << "max Fenchel gap     " << num(r.max_gap) << "\n"
      << "conjugate identity  " << num(r.conjugate_identity_error) << "\n"
      << "split rows          " << r.split_rows.size() << "\n";
    if (r.factor_map) {
      s << "  x_label        s(x)           u#(s(x))\n";
      for (std::size_t i = 0; i < u.size(); ++i) {
        const std::size_t j = (*r.factor_map)[i];
        char line[512];
        std::snprintf(line, sizeof line, "  %-14s %-14s %s\n", u.domain.sites[i].label.c_str(),
                      Y.sites[j].label.c_str(), vec(r.u_sharp->values[j]).c_str());
        s << line;
      }
    } else {
      s << plan_table(r.plan, u, Y);
    }
    return s.str();
  };
  emit(cfg, out, render(cfg, io::to_json(r), text, [&] { return plan_csv(r.plan); }));
  err << "classification: " << to_string(r.classification) << ", max gap " << num(r.max_gap) << "\n";
  return r.classification == Classification::Factorisation ? kOk : kInclusionOnly;
}

std::string report_table(const MultiplicityReport& report) {
  std::ostringstream s;
  s << "almost injective    " << (report.almost_injective ? "yes" : "no") << "\n"
    << "almost m-to-1       "
    << (report.almost_m_to_1 ? std::to_string(*report.almost_m_to_1) : std::string("no")) << "\n"
    << "max light count     " << report.max_light_count << "\n"
    << "  value                                  mass                     count  heavy\n";
  for (const auto& a : report.atoms) {
    char line[512];
    std::snprintf(line, sizeof line, "  %-38s %-24s %-6zu %s\n", vec(a.value).c_str(),
                  num(a.mass).c_str(), a.point_count, a.heavy ? "yes" : "no");
    s << line;
  }
  return s.str();
}

int cmd_rearrange(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const SampledMap v = io::load_sampled_map(cfg.u_path);
  HeavySet heavy;
  if (!cfg.heavy_path.empty()) heavy = io::heavy_from_json(io::read_json(cfg.heavy_path));
  const MtoOneResult result = construct_m_to_1(v, cfg.m, heavy);
  if (!equimeasurable(v, result.u, cfg.cluster_tol))
    throw Certification{kCertification, "constructed map is not equimeasurable with the input"};
  const MultiplicityReport report = multiplicity_report(result.u, heavy, cfg.cluster_tol);

  json j;
  j["map"] = io::to_json(result.u);
  j["m"] = cfg.m;
  j["report"] = io::to_json(report);
  const auto csv = [&] {
    std::string s = "label,";
    for (std::size_t d = 0; d < result.u.codomain_dimension; ++d) s += "value_" + std::to_string(d + 1) + ",";
    s += "weight\n";
    for (std::size_t i = 0; i < result.u.size(); ++i) {
      s += result.u.domain.sites[i].label + ",";
      for (double x : result.u.values[i]) s += num(x) + ",";
      s += num(result.u.domain.weights[i]) + "\n";
    }
    return s;
  };
  emit(cfg, out, render(cfg, j, [&] { return report_table(report); }, csv));
  err << "refined " << v.size() << " points into " << result.u.size() << " (m = " << cfg.m << ")\n";
  return kOk;
}

int cmd_sharp(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const SampledMap u = io::load_sampled_map(cfg.u_path);
  const DiscreteMeasure Y = io::load_measure(cfg.y_path);
  RearrangementOptions options;
  options.mode = cfg.refine_split ? SplitMode::Refine : SplitMode::Strict;
  options.cluster_tol = cfg.cluster_tol;
  options.gap_tol = cfg.tol;
  const RearrangementResult r = monotone_rearrangement(u, Y, options);

  json j;
  j["u_sharp"] = io::to_json(r.u_sharp);
  j["psi"] = io::potential_to_json(r.psi.psi_values);
  j["gaps"] = io::potential_to_json(r.gaps);
  j["max_gap"] = r.max_gap;
  j["refined"] = r.refined;
  const auto text = [&] {
    std::ostringstream s;
    s << "max Fenchel gap  " << num(r.max_gap) << (r.refined ? "  (split sites refined)" : "") << "\n"
      << "  y_label        psi(y)                   u#(y)\n";
    for (std::size_t j2 = 0; j2 < r.u_sharp.size(); ++j2) {
      char line[512];
      std::snprintf(line, sizeof line, "  %-14s %-24s %s\n", r.u_sharp.domain.sites[j2].label.c_str(),
                    num(r.psi.psi_values[j2]).c_str(), vec(r.u_sharp.values[j2]).c_str());
      s << line;
    }
    return s.str();
  };
  const auto csv = [&] {
    std::string s = "label,psi,gap\n";
    for (std::size_t k = 0; k < r.u_sharp.size(); ++k)
      s += r.u_sharp.domain.sites[k].label + "," + num(r.psi.psi_values[k]) + "," + num(r.gaps[k]) + "\n";
    return s;
  };
  emit(cfg, out, render(cfg, j, text, csv));
  err << "monotone rearrangement certified, max gap " << num(r.max_gap) << "\n";
  return kOk;
}

int cmd_gallery(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const GalleryInstance inst = gallery_instance(cfg.name, cfg.grid, cfg.seed);
  const PolarResult r = polar_factorize(inst.u, inst.Y, {cfg.tol, true});
  const CostMatrix cost = build_cost(inst.u, inst.Y);
  const DegeneracyReport degeneracy = degeneracy_report(r.plan, r.duals, cost, cfg.tol);
  const MultiplicityReport sharp_counts = multiplicity_report(inst.u_sharp, inst.heavy);
  const MultiplicityReport u_counts = multiplicity_report(inst.u, inst.heavy);

  json report;
  report["name"] = inst.name;
  report["grid"] = inst.grid;
  report["seed"] = cfg.seed;
  report["solve"] = io::certificate_json(r.primal, r.dual_value);
  report["factorize"] = {{"classification", std::string(to_string(r.classification))},
                         {"max_fenchel_gap", r.max_gap},
                         {"conjugate_identity_error", r.conjugate_identity_error},
                         {"split_rows", r.split_rows.size()}};
  report["degeneracy"] = io::to_json(degeneracy);
  report["multiplicity_u_sharp"] = io::to_json(sharp_counts);
  report["multiplicity_u"] = io::to_json(u_counts);

  const fs::path dir = cfg.out_path.empty() ? fs::path(".") : fs::path(cfg.out_path);
  fs::create_directories(dir);
  io::write_text(dir / "u.json", io::dump(io::to_json(inst.u)));
  io::write_text(dir / "Y.json", io::dump(io::to_json(inst.Y)));
  io::write_text(dir / "heavy.json", io::dump(io::to_json(inst.heavy)));
  io::write_text(dir / "report.json", io::dump(report));

  const auto text = [&] {
    std::ostringstream s;
    s << "instance            " << inst.name << " (N = " << inst.grid << ", seed " << cfg.seed << ")\n"
      << "I                   " << num(r.primal) << "\n"
      << "duality gap         " << num(r.primal - r.dual_value) << "\n"
      << "classification      " << to_string(r.classification) << "\n"
      << "max Fenchel gap     " << num(r.max_gap) << "\n"
      << "degeneracy index    " << num(degeneracy.degeneracy_index) << "\n"
      << "split index         " << num(degeneracy.split_index) << "\n"
      << "u# max level count  " << sharp_counts.max_light_count << "\n"
      << "  x_label        zero-rc columns  support columns\n";
    for (std::size_t i = 0; i < inst.u.size(); ++i) {
      char line[256];
      std::snprintf(line, sizeof line, "  %-14s %-16zu %zu\n", inst.u.domain.sites[i].label.c_str(),
                    degeneracy.zero_reduced_cost_columns[i], degeneracy.support_columns[i]);
      s << line;
    }
    return s.str();
  };
  const auto csv = [&] {
    std::string s = "label,zero_reduced_cost_columns,support_columns\n";
    for (std::size_t i = 0; i < inst.u.size(); ++i)
      s += inst.u.domain.sites[i].label + "," + std::to_string(degeneracy.zero_reduced_cost_columns[i]) +
           "," + std::to_string(degeneracy.support_columns[i]) + "\n";
    return s;
  };
  out << render(cfg, report, text, csv);
  err << "wrote u.json, Y.json, heavy.json, report.json to " << dir.string() << "\n";
  return kOk;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const SampledMap u = io::load_sampled_map(cfg.u_path);
  const DiscreteMeasure Y = io::load_measure(cfg.y_path);
  const json plan_json = io::read_json(cfg.plan_path);
  const TransportPlan plan = io::plan_from_json(plan_json, u.domain, Y);

  ConvexPotential psi;
  if (!cfg.psi_path.empty()) {
    psi = {Y, io::potential_from_json(io::read_json(cfg.psi_path))};
  } else if (plan_json.is_object() && plan_json.contains("psi")) {
    psi = {Y, io::potential_from_json(plan_json["psi"])};
  } else if (plan_json.is_object() && plan_json.contains("duals")) {
    psi = potential_from_duals(Y, io::potential_from_json(plan_json["duals"]["phi"]));
  } else {
    fail(ErrorCode::InvalidArgument, "no potential: pass --psi or a plan file carrying psi or duals");
  }
  validate(psi);

  const InclusionCheck inclusion = verify_polar_inclusion(plan, psi, u, cfg.tol);
  json j;
  j["inclusion"] = {{"holds", inclusion.holds}, {"max_gap", inclusion.max_gap}, {"tol", cfg.tol}};
  if (!inclusion.holds) {
    emit(cfg, out, cfg.format == "json" ? io::dump(j) : "max_gap " + num(inclusion.max_gap) + "\ninclusion FAILS\n");
    throw Certification{kInclusionFails, "inclusion fails: max gap " + num(inclusion.max_gap) +
                                             " exceeds " + num(cfg.tol)};
  }
  const OptimalityCheck opt = verify_optimality_of_inclusion(plan, psi, u, cfg.tol);
  j["optimality"] = {{"optimal", opt.optimal},
                     {"I", opt.plan_cost},
                     {"optimum", opt.optimum},
                     {"delta", opt.plan_cost - opt.optimum},
                     {"J", opt.shifted_cost}};
  const auto text = [&] {
    std::ostringstream s;
    s << "max_gap   " << num(inclusion.max_gap) << "\n"
      << "I         " << num(opt.plan_cost) << "\n"
      << "optimum   " << num(opt.optimum) << "\n"
      << "delta     " << num(opt.plan_cost - opt.optimum) << "\n"
      << "J         " << num(opt.shifted_cost) << "\n"
      << (opt.optimal ? "verified\n" : "optimality FAILS\n");
    return s.str();
  };
  emit(cfg, out, render(cfg, j, text, text));
  err << "max_gap " << num(inclusion.max_gap) << ", I - optimum " << num(opt.plan_cost - opt.optimum)
      << "\n";
  if (!opt.optimal)
    throw Certification{kOptimalityFails, "plan cost exceeds the optimum by " +
                                              num(opt.plan_cost - opt.optimum)};
  return kOk;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NumericalFailure:
    case ErrorCode::CertificateMissing:
      return kCertification;
    default:
      return kValidation;
  }
}

}  // namespace

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Monotone rearrangement, polar factorisation and polar inclusion of sampled maps",
               "polarfact"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--tol", cfg.tol, "Inclusion certificate tolerance (env POLARFACT_TOL)");
    sub->add_option("--cluster-tol", cfg.cluster_tol, "Value clustering tolerance")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", cfg.seed, "Random seed");
    sub->add_option("--out", cfg.out_path, "Output path");
    sub->add_option("--format", cfg.format, "Output format")
        ->check(CLI::IsMember({"json", "csv", "text"}));
  };
  const auto add_inputs = [&](CLI::App* sub) {
    sub->add_option("--u", cfg.u_path, "Sampled map file (JSON)")->required();
    sub->add_option("--Y", cfg.y_path, "Target measure file (JSON or CSV)")->required();
  };

  auto* solve = app.add_subcommand("solve", "Solve the quadratic-cost transport problem with duals");
  add_inputs(solve);
  add_common(solve);
  solve->add_flag("--oracle", cfg.oracle, "Cross-check against the permutation oracle");

  auto* factorize = app.add_subcommand("factorize", "Polar factorisation or polar inclusion of u");
  add_inputs(factorize);
  add_common(factorize);

  auto* rearrange = app.add_subcommand("rearrange", "Almost m-to-1 rearrangement on a refined domain");
  rearrange->add_option("--u", cfg.u_path, "Sampled map v (JSON)")->required();
  rearrange->add_option("--m", cfg.m, "Refinement factor")->required()->check(CLI::PositiveNumber);
  rearrange->add_option("--heavy", cfg.heavy_path, "Heavy-atom designation (JSON)");
  add_common(rearrange);

  auto* sharp = app.add_subcommand("sharp", "Monotone rearrangement u# of u on Y");
  add_inputs(sharp);
  add_common(sharp);
  sharp->add_flag("--refine-split", cfg.refine_split, "Subdivide sites whose mass is split");

  auto* gallery = app.add_subcommand("gallery", "Generate a degenerate-instance gallery entry and report");
  gallery->add_option("--name", cfg.name, "flat-segment | m-to-1-flat | injective-control")->required();
  gallery->add_option("--grid", cfg.grid, "Grid size N");
  add_common(gallery);

  auto* verify = app.add_subcommand("verify", "Verify a polar inclusion certificate and its optimality");
  add_inputs(verify);
  verify->add_option("--plan", cfg.plan_path, "Plan file (solve/factorize output)")->required();
  verify->add_option("--psi", cfg.psi_path, "Potential file (JSON array)");
  add_common(verify);

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }

  bool tol_given = false;
  for (auto* sub : app.get_subcommands()) {
    cfg.subcommand = sub->get_name();
    tol_given = sub->count("--tol") > 0;
  }
  if (!tol_given) {
    if (const char* env = std::getenv("POLARFACT_TOL")) {
      char* end = nullptr;
      cfg.tol = std::strtod(env, &end);
      if (end == env || *end != '\0') {
        err << "error: POLARFACT_TOL='" << env << "' is not a number\n";
        return kValidation;
      }
    }
  }
  if (!(cfg.tol > 0.0) || !std::isfinite(cfg.tol)) {
    err << "error: tolerance must be positive\n";
    return kValidation;
  }

  try {
    if (cfg.subcommand == "solve") return cmd_solve(cfg, out, err);
    if (cfg.subcommand == "factorize") return cmd_factorize(cfg, out, err);
    if (cfg.subcommand == "rearrange") return cmd_rearrange(cfg, out, err);
    if (cfg.subcommand == "sharp") return cmd_sharp(cfg, out, err);
    if (cfg.subcommand == "gallery") return cmd_gallery(cfg, out, err);
    if (cfg.subcommand == "verify") return cmd_verify(cfg, out, err);
  } catch (const Certification& c) {
    err << "error: " << c.message << "\n";
    return c.code;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }
  return kValidation;
}

}  // namespace polarfact::cli
