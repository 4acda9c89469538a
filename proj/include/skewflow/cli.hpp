#pragma once

// Batch front-end: JSON run configuration, flag overrides and the three
// subcommands (simulate, verify, converge).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "skewflow/errors.hpp"
#include "skewflow/flow.hpp"
#include "skewflow/geometry.hpp"
#include "skewflow/io.hpp"
#include "skewflow/verify.hpp"

namespace skewflow::cli {

using nlohmann::json;

enum ExitCode : int { kOk = 0, kValidation = 1, kRuntime = 2 };

/// Raised for malformed configurations; the message lists every bad field.
class ValidationError : public InvalidInput {
 public:
  explicit ValidationError(const std::vector<std::string>& problems) : InvalidInput(join(problems)) {}

 private:
  static std::string join(const std::vector<std::string>& problems) {
    std::string msg = "invalid configuration:";
    for (const auto& p : problems) msg += "\n  - " + p;
    return msg;
  }
};

struct GeometrySpec {
  std::string kind;  // circle | product_torus | perturbed_torus | file
  double r = 1.0;
  double a = 1.0;
  double b = 0.6;
  double eps = 0.05;
  std::uint64_t seed = 7;
  std::string path;
  int m = 0;  // parameter dimension; implied by kind except for files

  bool is_torus() const { return kind == "product_torus" || kind == "perturbed_torus"; }
};

struct RunConfig {
  GeometrySpec geometry;
  std::vector<int> sizes;
  flow::FlowConfig flow;
  std::string task;
  std::string verify_name = "theorem1";
  std::string output_dir = "out";
  bool snapshots = false;
  std::vector<int> resolutions{16, 32, 64};
  double dt_factor = 0.1;
  std::vector<double> h_list{1e-2, 1e-3, 1e-4};
};

struct Overrides {
  std::optional<double> dt;
  std::optional<double> t_end;
  std::optional<int> n;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> verify_name;
};

namespace detail {

class FieldReader {
 public:
  explicit FieldReader(std::vector<std::string>& problems) : problems_(problems) {}

  template <class T>
  void read(const json& obj, const std::string& key, const std::string& path, T& target) {
    if (!obj.is_object() || !obj.contains(key)) return;
    try {
      target = obj.at(key).get<T>();
    } catch (const json::exception&) {
      problems_.push_back(path + ": wrong type");
    }
  }

  void fail(const std::string& msg) { problems_.push_back(msg); }

 private:
  std::vector<std::string>& problems_;
};

}  // namespace detail

inline void validate(const RunConfig& cfg) {
  std::vector<std::string> problems;
  const auto& g = cfg.geometry;
  if (g.kind == "circle") {
    if (!(g.r > 0)) problems.push_back("geometry.r: must be positive");
  } else if (g.is_torus()) {
    if (!(g.a > 0)) problems.push_back("geometry.a: must be positive");
    if (!(g.b > 0)) problems.push_back("geometry.b: must be positive");
  } else if (g.kind == "file") {
    if (g.path.empty()) problems.push_back("geometry.path: required for kind 'file'");
    if (g.m != 1 && g.m != 2) problems.push_back("geometry.m: must be 1 or 2 for kind 'file'");
  } else {
    problems.push_back("geometry.kind: unknown geometry '" + g.kind + "'");
  }
  if (g.m == 1 || g.m == 2) {
    if (static_cast<int>(cfg.sizes.size()) != g.m)
      problems.push_back("grid.sizes: " + g.kind + " needs " + std::to_string(g.m) + " size(s)");
  }
  for (int s : cfg.sizes)
    if (s < 8 || s % 2 != 0) problems.push_back("grid.sizes: every size must be even and >= 8");
  if (!(cfg.flow.dt > 0)) problems.push_back("flow.dt: must be positive");
  if (!(cfg.flow.t_end >= 0)) problems.push_back("flow.t_end: must be non-negative");
  if (cfg.flow.output_every < 1) problems.push_back("flow.output_every: must be >= 1");
  if (cfg.resolutions.size() < 3) problems.push_back("converge.resolutions: need at least three");
  if (!(cfg.dt_factor > 0)) problems.push_back("converge.dt_factor: must be positive");
  if (!problems.empty()) throw ValidationError(problems);
}

inline RunConfig parse_config(const json& j) {
  std::vector<std::string> problems;
  detail::FieldReader rd(problems);
  RunConfig cfg;
  if (!j.is_object()) throw ValidationError({"config: top level must be a JSON object"});

  if (!j.contains("geometry") || !j["geometry"].is_object()) {
    problems.push_back("geometry: required object");
  } else {
    const auto& g = j["geometry"];
    rd.read(g, "kind", "geometry.kind", cfg.geometry.kind);
    rd.read(g, "r", "geometry.r", cfg.geometry.r);
    rd.read(g, "a", "geometry.a", cfg.geometry.a);
    rd.read(g, "b", "geometry.b", cfg.geometry.b);
    rd.read(g, "eps", "geometry.eps", cfg.geometry.eps);
    rd.read(g, "seed", "geometry.seed", cfg.geometry.seed);
    rd.read(g, "path", "geometry.path", cfg.geometry.path);
    rd.read(g, "m", "geometry.m", cfg.geometry.m);
    if (cfg.geometry.kind.empty()) problems.push_back("geometry.kind: required");
  }
  if (cfg.geometry.kind == "circle") cfg.geometry.m = 1;
  if (cfg.geometry.is_torus()) cfg.geometry.m = 2;

  if (j.contains("grid")) rd.read(j["grid"], "sizes", "grid.sizes", cfg.sizes);
  if (cfg.sizes.empty()) cfg.sizes.assign(static_cast<std::size_t>(cfg.geometry.m == 2 ? 2 : 1), cfg.geometry.m == 2 ? 32 : 256);

  if (j.contains("flow")) {
    const auto& f = j["flow"];
    std::string kind = "SMCF", scheme = "RK4";
    rd.read(f, "kind", "flow.kind", kind);
    rd.read(f, "scheme", "flow.scheme", scheme);
    rd.read(f, "dt", "flow.dt", cfg.flow.dt);
    rd.read(f, "t_end", "flow.t_end", cfg.flow.t_end);
    rd.read(f, "output_every", "flow.output_every", cfg.flow.output_every);
    rd.read(f, "seed", "flow.seed", cfg.flow.seed);
    rd.read(f, "stability_factor", "flow.stability_factor", cfg.flow.stability_factor);
    if (kind == "SMCF") cfg.flow.kind = flow::FlowKind::SMCF;
    else if (kind == "MCF") cfg.flow.kind = flow::FlowKind::MCF;
    else problems.push_back("flow.kind: must be SMCF or MCF");
    if (scheme == "RK4") cfg.flow.scheme = flow::Scheme::RK4;
    else if (scheme == "Euler") cfg.flow.scheme = flow::Scheme::Euler;
    else problems.push_back("flow.scheme: must be RK4 or Euler");
  }
  rd.read(j, "task", "task", cfg.task);
  rd.read(j, "verify_name", "verify_name", cfg.verify_name);
  rd.read(j, "output_dir", "output_dir", cfg.output_dir);
  rd.read(j, "snapshots", "snapshots", cfg.snapshots);
  if (j.contains("converge")) {
    rd.read(j["converge"], "resolutions", "converge.resolutions", cfg.resolutions);
    rd.read(j["converge"], "dt_factor", "converge.dt_factor", cfg.dt_factor);
    rd.read(j["converge"], "h_list", "converge.h_list", cfg.h_list);
  }
  if (!problems.empty()) throw ValidationError(problems);
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError({"--config: cannot open '" + path + "'"});
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ValidationError({"--config: malformed JSON (" + std::string(e.what()) + ")"});
  }
  return parse_config(j);
}

inline void apply(RunConfig& cfg, const Overrides& o) {
  if (o.dt) cfg.flow.dt = *o.dt;
  if (o.t_end) cfg.flow.t_end = *o.t_end;
  if (o.n) {
    for (auto& s : cfg.sizes) s = *o.n;
  }
  if (o.seed) cfg.geometry.seed = cfg.flow.seed = *o.seed;
  if (o.out) cfg.output_dir = *o.out;
  if (o.verify_name) cfg.verify_name = *o.verify_name;
}

template <int M>
geometry::Immersion<M> build_immersion(const RunConfig& cfg) {
  const auto& g = cfg.geometry;
  if constexpr (M == 1) {
    if (g.kind == "circle") return geometry::circle(g.r, cfg.sizes[0]);
    return geometry::load_csv<1>(g.path, geometry::PeriodicGrid<1>({cfg.sizes[0]}));
  } else {
    if (g.kind == "product_torus") return geometry::product_torus(g.a, g.b, cfg.sizes[0], cfg.sizes[1]);
    if (g.kind == "perturbed_torus")
      return geometry::perturbed_torus(g.a, g.b, g.eps, g.seed, cfg.sizes[0], cfg.sizes[1]);
    return geometry::load_csv<2>(g.path, geometry::PeriodicGrid<2>({cfg.sizes[0], cfg.sizes[1]}));
  }
}

inline std::string format_norm(double v) {
  std::ostringstream s;
  s << std::setprecision(12) << v;
  return s.str();
}

inline std::filesystem::path prepare_output(const RunConfig& cfg) {
  std::filesystem::path dir(cfg.output_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// -- simulate -----------------------------------------------------------------

template <int M>
int simulate(const RunConfig& cfg, std::ostream& log) {
  const auto dir = prepare_output(cfg);
  flow::FlowState<M> state{0.0, build_immersion<M>(cfg)};
  const bool torus = cfg.geometry.is_torus();
  std::vector<std::string> header{"t", "volume", "min_sv"};
  if (torus) header.insert(header.end(), {"a", "b"});
  io::CsvWriter csv((dir / "diagnostics.csv").string(), header);
  int snapshot = 0;
  auto emit = [&](const flow::FlowState<M>& s) {
    std::vector<double> row{s.t, geometry::volume(s.imm), geometry::min_singular_value(s.imm)};
    if constexpr (M == 2) {
      if (torus) {
        const auto fit = flow::fit_product_torus(s.imm);
        row.push_back(fit.a);
        row.push_back(fit.b);
      }
    }
    csv.row(row);
    if (cfg.snapshots) {
      std::ostringstream name;
      name << "snapshot_" << std::setw(5) << std::setfill('0') << snapshot++ << ".csv";
      geometry::write_csv((dir / name.str()).string(), s.imm);
    }
  };
  emit(state);
  const long steps = flow::step_count(cfg.flow);
  for (long s = 1; s <= steps; ++s) {
    flow::FlowConfig step_cfg = cfg.flow;
    step_cfg.dt = std::min(cfg.flow.dt, cfg.flow.t_end - state.t);
    state = flow::step(state, step_cfg);
    if (s == steps) state.t = cfg.flow.t_end;
    if (s % cfg.flow.output_every == 0 || s == steps) emit(state);
  }
  log << "simulate: " << steps << " steps to t=" << state.t << ", diagnostics in " << (dir / "diagnostics.csv").string()
      << "\n";
  return kOk;
}

// -- verify -------------------------------------------------------------------

inline void annotate(verify::Report& r, const RunConfig& cfg) {
  r.metadata["geometry"] = cfg.geometry.kind;
  r.metadata["flow_kind"] = flow::to_string(cfg.flow.kind);
  r.metadata["seed"] = std::to_string(cfg.geometry.seed);
}

template <int M>
int verify_run(const RunConfig& cfg, std::ostream& log) {
  const auto dir = prepare_output(cfg);
  const std::string name = cfg.verify_name;
  if (name == "theorem2") {
    const auto table = verify::theorem2_suite(cfg.flow.seed, cfg.h_list);
    io::write_json((dir / (name + "_report.json")).string(), io::to_json(table));
    io::CsvWriter csv((dir / (name + "_residual.csv")).string(), {"h", "residual"});
    for (const auto& r : table.rows) csv.row({r.h, r.residual});
    log << name << ": isometry=" << table.params.at("isometry_residual")
        << " order=" << (table.observed_order ? format_norm(*table.observed_order) : "n/a") << "\n";
    return kOk;
  }
  const auto imm = build_immersion<M>(cfg);
  verify::Report report;
  if (name == "theorem1") {
    flow::FlowConfig fc = cfg.flow;
    fc.t_end = 2.0 * fc.dt;
    fc.output_every = 1;
    const auto traj = flow::run(imm, fc);
    const auto identity =
        cfg.flow.kind == flow::FlowKind::SMCF ? verify::Identity::Schrodinger : verify::Identity::HeatFlow;
    report = verify::residual_theorem1(traj, 1, identity);
  } else if (name == "codazzi" || name == "identify") {
    const auto cache = geometry::fundamental_forms(imm);
    const auto rho = geometry::gauss_field(cache);
    report = name == "codazzi" ? verify::residual_codazzi(cache, rho) : verify::residual_identify(cache, rho);
  } else if (name == "conservation") {
    const auto traj = flow::run(imm, cfg.flow);
    const double v0 = geometry::volume(traj[0].imm);
    report.name = name;
    report.dt = cfg.flow.dt;
    for (int d = 0; d < M; ++d) report.grid_sizes.push_back(imm.grid.sizes()[d]);
    io::CsvWriter csv((dir / (name + "_residual.csv")).string(), {"t", "volume", "relative_drift"});
    double sq = 0.0;
    for (const auto& s : traj.states) {
      const double v = geometry::volume(s.imm);
      const double drift = std::abs(v - v0) / v0;
      report.residual.push_back(drift);
      report.max_norm = std::max(report.max_norm, drift);
      sq += drift * drift;
      csv.row({s.t, v, drift});
    }
    report.l2_norm = std::sqrt(sq / static_cast<double>(traj.size()));
    annotate(report, cfg);
    io::write_json((dir / (name + "_report.json")).string(), io::to_json(report));
    log << name << ": max=" << format_norm(report.max_norm) << " l2=" << format_norm(report.l2_norm) << "\n";
    return kOk;
  } else {
    throw ValidationError({"verify_name: unknown check '" + name + "'"});
  }
  annotate(report, cfg);
  io::write_json((dir / (name + "_report.json")).string(), io::to_json(report));
  io::write_residual_csv((dir / (name + "_residual.csv")).string(), report, imm.grid);
  log << name << ": max=" << format_norm(report.max_norm) << " l2=" << format_norm(report.l2_norm) << "\n";
  return kOk;
}

// -- converge -----------------------------------------------------------------

inline int converge_run(const RunConfig& cfg, std::ostream& log) {
  const auto dir = prepare_output(cfg);
  verify::Problem problem;
  const std::string& name = cfg.verify_name;
  const bool mcf = cfg.flow.kind == flow::FlowKind::MCF;
  if (name == "theorem1") problem = mcf ? verify::Problem::HeatFlow : verify::Problem::Theorem1;
  else if (name == "heat_flow") problem = verify::Problem::HeatFlow;
  else if (name == "lhs_agreement") problem = verify::Problem::LhsAgreement;
  else if (name == "codazzi") problem = verify::Problem::Codazzi;
  else if (name == "identify") problem = verify::Problem::Identify;
  else throw ValidationError({"verify_name: '" + name + "' has no convergence study"});

  const bool needs_perturbed = problem != verify::Problem::Identify;
  if (needs_perturbed ? cfg.geometry.kind != "perturbed_torus" : !cfg.geometry.is_torus())
    throw ValidationError({"geometry.kind: convergence study '" + name + "' needs a " +
                           (needs_perturbed ? "perturbed_torus" : "torus") + " geometry"});
  verify::StudyParams params;
  params.a = cfg.geometry.a;
  params.b = cfg.geometry.b;
  params.eps = cfg.geometry.eps;
  params.seed = cfg.geometry.seed;
  params.dt_factor = cfg.dt_factor;
  const auto table = verify::convergence_study(problem, cfg.resolutions, params);
  io::write_json((dir / (table.name + "_convergence.json")).string(), io::to_json(table));
  log << table.name << ":";
  for (const auto& r : table.rows) log << " N=" << r.resolution << " residual=" << format_norm(r.residual);
  log << " order=" << (table.observed_order ? format_norm(*table.observed_order) : table.status) << "\n";
  return kOk;
}

// -- entry point --------------------------------------------------------------

inline int dispatch(const std::string& task, RunConfig cfg, const Overrides& overrides, std::ostream& log) {
  apply(cfg, overrides);
  cfg.task = task;
  validate(cfg);
  if (task == "converge") return converge_run(cfg, log);
  const bool one = cfg.geometry.m == 1;
  if (task == "simulate") return one ? simulate<1>(cfg, log) : simulate<2>(cfg, log);
  if (task == "verify") return one ? verify_run<1>(cfg, log) : verify_run<2>(cfg, log);
  throw ValidationError({"task: unknown task '" + task + "'"});
}

/// Parses argv and runs; exit 0 on success, 1 on usage or validation
/// errors, 2 on runtime degeneracy.
inline int main(int argc, const char* const* argv, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Skew mean curvature flow and Gauss map verification"};
  app.require_subcommand(1);
  std::string config_path;
  Overrides o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--dt", o.dt, "time step");
    sub->add_option("--t-end", o.t_end, "final time");
    sub->add_option("--n", o.n, "grid size in every direction");
    sub->add_option("--seed", o.seed, "seed for perturbations and frame curves");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--verify-name", o.verify_name, "theorem1|codazzi|identify|theorem2|conservation");
  };
  auto* sim = app.add_subcommand("simulate", "integrate the flow and write diagnostics");
  auto* ver = app.add_subcommand("verify", "evaluate one residual and write a report");
  auto* con = app.add_subcommand("converge", "refinement study with observed order");
  for (auto* sub : {sim, ver, con}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, log, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, log, err);
    return kValidation;
  }

  try {
    const std::string task = sim->parsed() ? "simulate" : ver->parsed() ? "verify" : "converge";
    return dispatch(task, load_config(config_path), o, log);
  } catch (const DegenerateImmersion& e) {
    err << "error: " << e.what() << "\n";
    return kRuntime;
  } catch (const BlowUp& e) {
    err << "error: " << e.what() << "\n";
    return kRuntime;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }
}

}  // namespace skewflow::cli
