// Acceptance suite: one PASS/FAIL line per criterion; exit status is the
// number of failures (capped at 1).

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "skewflow/cli.hpp"
#include "skewflow/flow.hpp"
#include "skewflow/geometry.hpp"
#include "skewflow/grassmann.hpp"
#include "skewflow/verify.hpp"

using namespace skewflow;

namespace {

int failures = 0;

void report(int id, const std::string& what, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << id << ": " << what << " | " << detail << std::endl;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double pair_order(double coarse, double fine) { return std::log2(coarse / fine); }

template <class Fn>
void guarded(int id, const std::string& what, Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  try {
    std::string detail;
    const bool ok = fn(detail);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report(id, what, ok, detail + " (" + fmt(secs) + " s)");
  } catch (const std::exception& e) {
    report(id, what, false, std::string("exception: ") + e.what());
  }
}

bool isometry(std::string& detail) {
  std::mt19937_64 rng(2024);
  const double r22 = verify::isometry_residual(2, 2, 1000, rng);
  const double r12 = verify::isometry_residual(1, 2, 1000, rng);
  detail = "G(2,2) max=" + fmt(r22) + ", G(1,2) max=" + fmt(r12);
  return r22 <= 1e-12 && r12 <= 1e-12;
}

bool connection(std::string& detail) {
  const auto table = verify::theorem2_suite(11, {1e-2, 1e-3, 1e-4});
  detail = "residuals";
  for (const auto& r : table.rows) detail += " " + fmt(r.residual);
  detail += ", order=" + (table.observed_order ? fmt(*table.observed_order) : table.status);
  return table.observed_order && *table.observed_order >= 0.9;
}

bool sphere_sanity(std::string& detail) {
  std::mt19937_64 rng(99);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const auto frame = grassmann::random_frame(1, 2, rng);
    const auto c = verify::random_coeffs(1, 2, rng);
    const Eigen::Vector3d u = frame.e.col(0);
    const Eigen::Vector3d v = grassmann::psi(frame, c).coeffs();
    const Eigen::Vector3d jv = grassmann::psi(frame, grassmann::jtilde_coeffs(c)).coeffs();
    worst = std::max(worst, (jv - u.cross(v)).norm());
  }
  detail = "max |Jt v - u x v| = " + fmt(worst);
  return worst <= 1e-12;
}

bool identify(std::string& detail) {
  verify::StudyParams p;
  p.a = 1.0;
  p.b = 0.6;
  const double r32 = verify::problem_residual(verify::Problem::Identify, 32, p);
  const double r64 = verify::problem_residual(verify::Problem::Identify, 64, p);
  const double order = pair_order(r32, r64);
  detail = "N=32 " + fmt(r32) + ", N=64 " + fmt(r64) + ", order=" + fmt(order);
  return order >= 1.9;
}

bool circle(std::string& detail) {
  const auto imm0 = geometry::circle(1.0, 256);
  flow::FlowConfig cfg;
  cfg.kind = flow::FlowKind::SMCF;
  cfg.scheme = flow::Scheme::RK4;
  cfg.dt = 1e-3;
  cfg.t_end = 0.5;
  cfg.output_every = 500;
  const auto traj = flow::run(imm0, cfg);
  const auto& imm = traj.states.back().imm;

  auto centroid = [](const geometry::Immersion<1>& c) {
    Eigen::Vector3d s = Eigen::Vector3d::Zero();
    for (const auto& p : c.F) s += p;
    return Eigen::Vector3d(s / static_cast<double>(c.F.size()));
  };
  const Eigen::Vector3d shift = centroid(imm) - centroid(imm0);
  const Eigen::Vector3d binormal(0.0, 0.0, 1.0);
  const double along = shift.dot(binormal);
  const double across = (shift - along * binormal).norm();
  const Eigen::Vector3d c = centroid(imm);
  double drift = 0.0;
  for (const auto& p : imm.F) drift = std::max(drift, std::abs((p - c).norm() - 1.0));
  const auto rho0 = geometry::gauss_field(imm0).coefficients();
  const auto rho1 = geometry::gauss_field(imm).coefficients();
  double gauss = 0.0;
  for (std::size_t i = 0; i < rho0.size(); ++i) gauss = std::max(gauss, (rho1[i] - rho0[i]).norm());
  detail = "displacement=" + fmt(along) + " (in-plane " + fmt(across) + "), radius drift=" + fmt(drift) +
           ", Gauss variation=" + fmt(gauss);
  return std::abs(along - 0.5) <= 5e-4 && drift <= 1e-8 && gauss <= 1e-6;
}

bool torus(std::string& detail) {
  const int n = 160;
  flow::FlowConfig cfg;
  cfg.kind = flow::FlowKind::SMCF;
  cfg.dt = 1e-3;
  cfg.t_end = 0.2;
  cfg.output_every = 20;
  const auto traj = flow::run(geometry::product_torus(1.0, 1.0, n, n), cfg);
  const auto ode = flow::product_torus_ode_oracle(1.0, 1.0, cfg.t_end, cfg.dt);
  const double area0 = geometry::volume(traj[0].imm);
  double radius_err = 0.0, ab_err = 0.0, area_err = 0.0, shape = 0.0;
  for (const auto& s : traj.states) {
    const auto fit = flow::fit_product_torus(s.imm);
    const auto step = static_cast<std::size_t>(std::lround(s.t / cfg.dt));
    radius_err = std::max({radius_err, std::abs(fit.a - ode[step].a), std::abs(fit.b - ode[step].b)});
    ab_err = std::max(ab_err, std::abs(fit.a * fit.b - 1.0));
    area_err = std::max(area_err, std::abs(geometry::volume(s.imm) - area0) / area0);
    shape = std::max(shape, fit.max_deviation);
  }
  const auto fit_end = flow::fit_product_torus(traj.states.back().imm);

  flow::FlowConfig mcf;
  mcf.kind = flow::FlowKind::MCF;
  mcf.dt = 1e-2;
  mcf.t_end = 0.2;
  const auto heat = flow::run(geometry::product_torus(1.0, 1.0, 32, 32), mcf);
  bool decreasing = true;
  for (std::size_t i = 1; i < heat.size(); ++i)
    decreasing = decreasing && geometry::volume(heat[i].imm) < geometry::volume(heat[i - 1].imm);

  detail = "N=" + std::to_string(n) + ", a(T)=" + fmt(fit_end.a) + " b(T)=" + fmt(fit_end.b) +
           ", radius err=" + fmt(radius_err) + ", ab drift=" + fmt(ab_err) + ", area drift=" + fmt(area_err) +
           ", MCF area strictly decreasing=" + (decreasing ? "yes" : "no") + " over " +
           std::to_string(heat.size() - 1) + " steps";
  return radius_err <= 1e-4 && ab_err <= 1e-6 && area_err <= 1e-6 && decreasing;
}

std::string describe(const verify::ConvergenceTable& t) {
  std::string s;
  for (const auto& r : t.rows) s += "N=" + std::to_string(r.resolution) + " " + fmt(r.residual) + ", ";
  return s + "order=" + (t.observed_order ? fmt(*t.observed_order) : t.status);
}

bool order_at_least(const verify::ConvergenceTable& t, double p) {
  return t.status == "ok" && t.observed_order && *t.observed_order >= p;
}

bool main_theorem(std::string& detail) {
  const std::vector<int> res{16, 32, 64};
  const auto t1 = verify::convergence_study(verify::Problem::Theorem1, res);
  const auto lhs = verify::convergence_study(verify::Problem::LhsAgreement, res);
  detail = "residual: " + describe(t1) + "; lhs agreement: " + describe(lhs);
  return order_at_least(t1, 1.9) && order_at_least(lhs, 1.9);
}

bool codazzi(std::string& detail) {
  const auto t = verify::convergence_study(verify::Problem::Codazzi, {16, 32, 64});
  detail = describe(t);
  return order_at_least(t, 1.9);
}

bool heat_flow(std::string& detail) {
  const auto t = verify::convergence_study(verify::Problem::HeatFlow, {16, 32, 64});
  detail = describe(t);
  return order_at_least(t, 1.9);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool determinism(std::string& detail) {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "skewflow_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path config = root / "config.json";
  std::ofstream(config) << R"({"geometry": {"kind": "perturbed_torus", "a": 1.0, "b": 0.6, "eps": 0.05, "seed": 3},
    "grid": {"sizes": [24, 24]}, "flow": {"kind": "SMCF", "dt": 0.0005, "seed": 3},
    "converge": {"resolutions": [16, 24, 32]}})";

  const std::vector<std::pair<std::string, std::string>> runs{
      {"verify", "theorem1"}, {"verify", "codazzi"}, {"verify", "identify"},
      {"verify", "theorem2"}, {"converge", "theorem1"}, {"converge", "codazzi"}};
  int compared = 0;
  for (const auto& [task, name] : runs) {
    std::string printed[2];
    std::vector<std::string> files[2];
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path out = root / ("rep" + std::to_string(rep));
      fs::remove_all(out);
      const std::string cfg = config.string(), dir = out.string();
      const char* argv[] = {"skewflow", task.c_str(), "--config", cfg.c_str(), "--out", dir.c_str(),
                            "--verify-name", name.c_str(), "--seed", "3"};
      std::ostringstream log, err;
      if (cli::main(10, argv, log, err) != 0) {
        detail = task + " " + name + " failed: " + err.str();
        return false;
      }
      printed[rep] = log.str();
      std::vector<fs::path> paths;
      for (const auto& e : fs::directory_iterator(out)) paths.push_back(e.path());
      std::sort(paths.begin(), paths.end());
      for (const auto& p : paths) files[rep].push_back(p.filename().string() + "\n" + slurp(p));
    }
    if (printed[0] != printed[1] || files[0] != files[1]) {
      detail = task + " " + name + " differs between repeated runs";
      return false;
    }
    compared += static_cast<int>(files[0].size());
  }
  fs::remove_all(root);
  detail = std::to_string(runs.size()) + " runs repeated, printed norms and " + std::to_string(compared) +
           " output files byte-identical";
  return true;
}

}  // namespace

int main() {
  guarded(1, "bundle map isometry in G(2,2) and G(1,2)", isometry);
  guarded(2, "connection preservation, observed order >= 0.9", connection);
  guarded(3, "G(1,2) complex structure equals u x (.)", sphere_sanity);
  guarded(4, "frame derivative vs second fundamental form on (1, 0.6) torus, order >= 1.9", identify);
  guarded(5, "translating circle under the binormal flow", circle);
  guarded(6, "product torus radii, ab, area; MCF area decrease", torus);
  guarded(7, "Gauss map Schroedinger identity on perturbed torus, order >= 1.9", main_theorem);
  guarded(8, "tension equals grad-perp H, order >= 1.9", codazzi);
  guarded(9, "Gauss map heat flow identity under MCF, order >= 1.9", heat_flow);
  guarded(10, "repeated verify/converge runs are identical", determinism);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
