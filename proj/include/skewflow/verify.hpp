#pragma once

// Discrete checks of the Gauss-map identities: the tension field of the Gauss
// map, both sides of d(rho)/dt = Jt tau(rho), the Codazzi closure, the
// identification of d(rho) with the second fundamental form, and the
// connection-preserving bundle map. Residuals are reported as per-node
// fields with max and metric-weighted L2 norms, and refined into tables of
// observed convergence orders.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "skewflow/errors.hpp"
#include "skewflow/exterior.hpp"
#include "skewflow/flow.hpp"
#include "skewflow/geometry.hpp"
#include "skewflow/grassmann.hpp"

namespace skewflow::verify {

using exterior::MultiVector;
using geometry::GaussField;
using geometry::GeometryCache;
using grassmann::AdaptedFrame;
using grassmann::TangentCoeffs;

using CoeffField = std::vector<TangentCoeffs>;

// -- reports ------------------------------------------------------------------

struct Report {
  std::string name;
  std::vector<double> residual;  // per node
  double max_norm = 0.0;
  double l2_norm = 0.0;  // weighted by sqrt(det g) and the cell volume
  std::vector<int> grid_sizes;
  double dt = 0.0;
  std::map<std::string, std::string> metadata;
  std::map<std::string, double> extra;  // secondary norms, e.g. cross-checks
};

struct ConvergenceRow {
  int resolution = 0;
  double h = 0.0;
  double residual = 0.0;
};

struct ConvergenceTable {
  std::string name;
  std::map<std::string, std::string> params;
  std::vector<ConvergenceRow> rows;
  std::optional<double> observed_order;
  std::string status;  // "ok", "unreliable" (non-monotone) or "below floor"
};

/// Residuals at or below this are treated as exact zeros and not fitted.
inline constexpr double kResidualFloor = 1e-13;

/// Least-squares slope of log(residual) against log(h).
inline ConvergenceTable fit_order(ConvergenceTable table) {
  if (table.rows.size() < 2) throw InvalidInput("need at least two rows to fit an order");
  for (const auto& r : table.rows) {
    if (!(r.residual > kResidualFloor)) {
      table.observed_order.reset();
      table.status = "below floor";
      return table;
    }
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(table.rows.size());
  for (const auto& r : table.rows) {
    const double x = std::log(r.h), y = std::log(r.residual);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  table.observed_order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  bool monotone = true;
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    const bool finer = table.rows[i].h < table.rows[i - 1].h;
    if (finer != (table.rows[i].residual < table.rows[i - 1].residual)) monotone = false;
  }
  table.status = monotone ? "ok" : "unreliable";
  return table;
}

template <int M>
Report make_report(std::string name, std::vector<double> residual, const GeometryCache<M>& cache) {
  if (residual.size() != cache.size()) throw InvalidInput("residual field does not match the grid");
  Report r;
  r.name = std::move(name);
  double sum = 0.0;
  for (std::size_t i = 0; i < residual.size(); ++i) {
    r.max_norm = std::max(r.max_norm, residual[i]);
    sum += residual[i] * residual[i] * cache.nodes[i].sqrt_det_g;
  }
  r.l2_norm = std::sqrt(sum * cache.grid.cell_volume());
  r.residual = std::move(residual);
  for (int d = 0; d < M; ++d) r.grid_sizes.push_back(cache.grid.sizes()[d]);
  return r;
}

inline double max_difference(const CoeffField& a, const CoeffField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, (a[i] - b[i]).norm());
  return m;
}

inline std::vector<double> pointwise_difference(const CoeffField& a, const CoeffField& b) {
  if (a.size() != b.size()) throw InvalidInput("coefficient fields have different sizes");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] - b[i]).norm();
  return out;
}

inline CoeffField apply_jtilde(const CoeffField& c) {
  CoeffField out;
  out.reserve(c.size());
  for (const auto& x : c) out.push_back(grassmann::jtilde_coeffs(x));
  return out;
}

// -- Gauss map derivatives ----------------------------------------------------

/// Tension field of the Gauss map: the componentwise Laplace-Beltrami
/// operator (1/sqrt g) d_i(sqrt g g^ij d_j rho) in Lambda^m R^n, projected
/// onto the tangent space of G at each node. Diagonal terms use the compact
/// three-point flux form with averaged half-node coefficients; mixed terms
/// use nested centered differences.
template <int M>
CoeffField tension(const GaussField& rho, const GeometryCache<M>& cache) {
  if (rho.size() != cache.size()) throw InvalidInput("tension: Gauss field and geometry come from different grids");
  const auto& grid = cache.grid;
  const auto R = rho.coefficients();
  const std::size_t count = R.size();
  std::vector<Eigen::VectorXd> lap(count, Eigen::VectorXd::Zero(R.front().size()));

  for (int i = 0; i < M; ++i) {
    const double h = grid.spacing(i);
    for (std::size_t node = 0; node < count; ++node) {
      const std::size_t up = grid.offset(node, geometry::unit_offset<M>(i, 1));
      const std::size_t dn = grid.offset(node, geometry::unit_offset<M>(i, -1));
      auto coeff = [&](std::size_t k) { return cache.nodes[k].sqrt_det_g * cache.nodes[k].g_inv(i, i); };
      const double k_up = 0.5 * (coeff(node) + coeff(up));
      const double k_dn = 0.5 * (coeff(node) + coeff(dn));
      lap[node] += (k_up * (R[up] - R[node]) - k_dn * (R[node] - R[dn])) / (h * h);
    }
  }
  if constexpr (M == 2) {
    for (int i = 0; i < 2; ++i) {
      const int j = 1 - i;
      const auto dR = geometry::diff1(grid, R, j);
      std::vector<Eigen::VectorXd> flux(count);
      for (std::size_t node = 0; node < count; ++node)
        flux[node] = cache.nodes[node].sqrt_det_g * cache.nodes[node].g_inv(i, j) * dR[node];
      const auto div = geometry::diff1(grid, flux, i);
      for (std::size_t node = 0; node < count; ++node) lap[node] += div[node];
    }
  }

  CoeffField out(count);
  const int n = M + 2;
  for (std::size_t node = 0; node < count; ++node) {
    const MultiVector w(n, M, lap[node] / cache.nodes[node].sqrt_det_g);
    out[node] = grassmann::project_to_tangent(cache.frames[node], w);
  }
  return out;
}

/// Coefficients of (normal derivative of H along the unit frame direction
/// e_i) against nu_alpha. With J applied this is the analytic right-hand
/// side for d(rho)/dt under SMCF; without J it is the Codazzi side of tau.
template <int M>
CoeffField mean_curvature_gradient_coeffs(const GeometryCache<M>& cache, bool rotate) {
  CoeffField out(cache.size());
  for (std::size_t node = 0; node < cache.size(); ++node) {
    const auto& geo = cache.nodes[node];
    TangentCoeffs c = TangentCoeffs::zero(M, 2);
    for (int i = 0; i < M; ++i) {
      geometry::Point<M> grad = geometry::Point<M>::Zero();
      for (int j = 0; j < M; ++j) grad += geo.r_inv(j, i) * cache.gradH_perp[node][j];
      if (rotate) grad = geo.rotate_normal(grad);
      for (int al = 0; al < 2; ++al) c.a(i, al) = grad.dot(geo.nu.col(al));
    }
    out[node] = c;
  }
  return out;
}

/// d(rho)/dt predicted from one time slice: Jt applied to grad-perp H (x) e_i*.
template <int M>
CoeffField dt_rho_analytic(const GeometryCache<M>& cache) {
  return mean_curvature_gradient_coeffs(cache, true);
}

/// Centered time difference of the Gauss field at traj[index], projected
/// onto the tangent space at the center.
template <int M>
CoeffField dt_rho_numeric(const flow::Trajectory<M>& traj, std::size_t index) {
  if (index == 0 || index + 1 >= traj.size())
    throw InvalidInput("dt_rho_numeric needs states on both sides of index " + std::to_string(index));
  const auto& prev = traj[index - 1];
  const auto& next = traj[index + 1];
  const double span = next.t - prev.t;
  if (!(span > 0)) throw InvalidInput("trajectory timestamps are not increasing");
  if (!(prev.imm.grid == next.imm.grid) || !(prev.imm.grid == traj[index].imm.grid))
    throw InvalidInput("trajectory states use different grids");
  const auto frames = geometry::frame_field(traj[index].imm);
  const auto before = geometry::gauss_field(prev.imm).coefficients();
  const auto after = geometry::gauss_field(next.imm).coefficients();
  CoeffField out(frames.size());
  const int n = M + 2;
  for (std::size_t node = 0; node < frames.size(); ++node)
    out[node] = grassmann::project_to_tangent(frames[node], MultiVector(n, M, (after[node] - before[node]) / span));
  return out;
}

enum class Identity {
  Schrodinger,  // d(rho)/dt = Jt tau(rho), for SMCF trajectories
  HeatFlow,     // d(rho)/dt = tau(rho), for MCF trajectories
};

/// Residual of d(rho)/dt against Jt tau(rho) (or tau(rho)) at traj[index].
/// Extra norms: "lhs_agreement_max" compares the numeric time derivative
/// with the one-slice prediction from grad-perp H; "analytic_residual_max"
/// compares that prediction with the right-hand side.
template <int M>
Report residual_theorem1(const flow::Trajectory<M>& traj, std::size_t index,
                         Identity identity = Identity::Schrodinger) {
  const auto lhs = dt_rho_numeric(traj, index);
  const auto& center = traj[index].imm;
  const auto cache = geometry::fundamental_forms(center);
  const auto rho = geometry::gauss_field(cache);
  const auto tau = tension(rho, cache);
  const bool skew = identity == Identity::Schrodinger;
  const auto rhs = skew ? apply_jtilde(tau) : tau;
  const auto analytic = mean_curvature_gradient_coeffs(cache, skew);

  Report r = make_report(skew ? "theorem1" : "heat_flow", pointwise_difference(lhs, rhs), cache);
  r.dt = 0.5 * (traj[index + 1].t - traj[index - 1].t);
  r.metadata["identity"] = skew ? "dt_rho = Jt tau(rho)" : "dt_rho = tau(rho)";
  r.metadata["time"] = std::to_string(traj[index].t);
  r.extra["lhs_agreement_max"] = max_difference(lhs, analytic);
  r.extra["analytic_residual_max"] = max_difference(analytic, rhs);
  return r;
}

/// tau(rho) against the coefficients of grad-perp H.
template <int M>
Report residual_codazzi(const GeometryCache<M>& cache, const GaussField& rho) {
  const auto tau = tension(rho, cache);
  const auto grad = mean_curvature_gradient_coeffs(cache, false);
  Report r = make_report("codazzi", pointwise_difference(tau, grad), cache);
  r.extra["tension_max"] = 0.0;
  for (const auto& t : tau) r.extra["tension_max"] = std::max(r.extra["tension_max"], t.norm());
  return r;
}

/// d(rho) along each unit frame direction e_i, pulled back through psi,
/// against the second fundamental form A(e_i, e_j) in the same frame.
template <int M>
Report residual_identify(const GeometryCache<M>& cache, const GaussField& rho) {
  if (rho.size() != cache.size()) throw InvalidInput("identify: Gauss field and geometry come from different grids");
  const auto R = rho.coefficients();
  std::array<std::vector<Eigen::VectorXd>, M> dR;
  for (int d = 0; d < M; ++d) dR[d] = geometry::diff1(cache.grid, R, d);
  std::vector<double> residual(cache.size());
  const int n = M + 2;
  for (std::size_t node = 0; node < cache.size(); ++node) {
    const auto& geo = cache.nodes[node];
    double sq = 0.0;
    for (int i = 0; i < M; ++i) {
      Eigen::VectorXd along = Eigen::VectorXd::Zero(R[node].size());
      for (int j = 0; j < M; ++j) along += geo.r_inv(j, i) * dR[j][node];
      const auto drho = grassmann::project_to_tangent(cache.frames[node], MultiVector(n, M, along));
      for (int al = 0; al < 2; ++al) {
        const Eigen::Matrix<double, M, M> a_frame = geo.r_inv.transpose() * geo.A[al] * geo.r_inv;
        for (int j = 0; j < M; ++j) {
          const double diff = drho.a(j, al) - a_frame(i, j);
          sq += diff * diff;
        }
      }
    }
    residual[node] = std::sqrt(sq);
  }
  return make_report("identify", std::move(residual), cache);
}

// -- bundle map along curves in G ---------------------------------------------

/// Smooth curve of adapted frames t -> Q(t) [e | nu] with Q(t) the Cayley
/// transform of the skew matrix t K1 + t^2 K2; Q(t) is a rotation, so every
/// frame on the curve is orthonormal and positively oriented.
struct FrameCurve {
  AdaptedFrame base;
  Eigen::MatrixXd k1;
  Eigen::MatrixXd k2;

  AdaptedFrame at(double t) const {
    const int n = base.n();
    const Eigen::MatrixXd s = t * k1 + t * t * k2;
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd q = (id - s).partialPivLu().solve(id + s);
    const Eigen::MatrixXd full = q * base.full();
    return AdaptedFrame{full.leftCols(base.m()), full.rightCols(base.k())};
  }
};

template <class Rng>
FrameCurve random_frame_curve(int m, int k, Rng& rng) {
  const int n = m + k;
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto skew = [&] {
    Eigen::MatrixXd a(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) a(i, j) = gauss(rng);
    return Eigen::MatrixXd(0.5 * (a - a.transpose()));
  };
  FrameCurve c{grassmann::random_frame(m, k, rng), skew(), skew()};
  return c;
}

inline FrameCurve constant_frame_curve(const AdaptedFrame& base) {
  return {base, Eigen::MatrixXd::Zero(base.n(), base.n()), Eigen::MatrixXd::Zero(base.n(), base.n())};
}

/// Max over (i, alpha) of the mismatch between the projected derivative of
/// E_{i alpha} along the curve and psi of the tensor-product covariant
/// derivative of e_i (x) nu_alpha, both by forward differences of step h.
inline double connection_residual(const FrameCurve& curve, double h) {
  const AdaptedFrame f0 = curve.at(0.0);
  const AdaptedFrame f1 = curve.at(h);
  const int m = f0.m(), k = f0.k();
  const auto basis0 = grassmann::tangent_basis(f0);
  const auto basis1 = grassmann::tangent_basis(f1);
  const Eigen::MatrixXd de = (f1.e - f0.e) / h;
  const Eigen::MatrixXd dnu = (f1.nu - f0.nu) / h;
  double worst = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int al = 0; al < k; ++al) {
      const std::size_t slot = grassmann::basis_slot(f0, i, al);
      const TangentCoeffs lhs = grassmann::project_to_tangent(f0, (basis1[slot] - basis0[slot]) * (1.0 / h));
      TangentCoeffs rhs = TangentCoeffs::zero(m, k);
      for (int j = 0; j < m; ++j) rhs.a(j, al) += f0.e.col(j).dot(de.col(i));
      for (int be = 0; be < k; ++be) rhs.a(i, be) += f0.nu.col(be).dot(dnu.col(al));
      worst = std::max(worst, (lhs - rhs).norm());
    }
  }
  return worst;
}

/// Mismatch between the projected derivative of psi(Jt c) and Jt applied to
/// the projected derivative of psi(c), for constant coefficients c.
inline double kahler_residual(const FrameCurve& curve, const TangentCoeffs& c, double h) {
  const AdaptedFrame f0 = curve.at(0.0);
  const AdaptedFrame f1 = curve.at(h);
  const TangentCoeffs jc = grassmann::jtilde_coeffs(c);
  const auto d_plain = (grassmann::psi(f1, c) - grassmann::psi(f0, c)) * (1.0 / h);
  const auto d_rot = (grassmann::psi(f1, jc) - grassmann::psi(f0, jc)) * (1.0 / h);
  const auto lhs = grassmann::project_to_tangent(f0, d_rot);
  const auto rhs = grassmann::jtilde_coeffs(grassmann::project_to_tangent(f0, d_plain));
  return (lhs - rhs).norm();
}

template <class Rng>
TangentCoeffs random_coeffs(int m, int k, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  TangentCoeffs c = TangentCoeffs::zero(m, k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < m; ++i) c.a(i, j) = gauss(rng);
  return c;
}

/// Max |<psi c, psi d> - <c, d>_F| over random frames and coefficient pairs.
template <class Rng>
double isometry_residual(int m, int k, int trials, Rng& rng) {
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const auto frame = grassmann::random_frame(m, k, rng);
    const auto c = random_coeffs(m, k, rng);
    const auto d = random_coeffs(m, k, rng);
    const double lhs = exterior::inner(grassmann::psi(frame, c), grassmann::psi(frame, d));
    worst = std::max(worst, std::abs(lhs - c.dot(d)));
  }
  return worst;
}

/// Connection preservation of the bundle map on a seeded curve in G(2,2):
/// one row per step size, plus the exact isometry residual in params.
inline ConvergenceTable theorem2_suite(std::uint64_t seed, const std::vector<double>& h_list, int m = 2, int k = 2) {
  if (h_list.size() < 2) throw InvalidInput("theorem2_suite needs at least two step sizes");
  std::mt19937_64 rng(seed);
  const auto curve = random_frame_curve(m, k, rng);
  ConvergenceTable table;
  table.name = "theorem2_connection";
  table.params["seed"] = std::to_string(seed);
  table.params["m"] = std::to_string(m);
  table.params["k"] = std::to_string(k);
  for (double h : h_list) table.rows.push_back({0, h, connection_residual(curve, h)});
  std::mt19937_64 iso_rng(seed + 1);
  std::ostringstream iso;
  iso.precision(6);
  iso << isometry_residual(m, k, 1000, iso_rng);
  table.params["isometry_residual"] = iso.str();
  return fit_order(std::move(table));
}

// -- convergence studies ------------------------------------------------------

struct StudyParams {
  double a = 1.0;
  double b = 0.6;
  double eps = 0.05;
  std::uint64_t seed = 7;
  double dt_factor = 0.1;  // dt = dt_factor * h^2
};

/// Which residual a refinement study measures.
enum class Problem {
  Theorem1,      // max |dt rho - Jt tau| on an SMCF run of the perturbed torus
  LhsAgreement,  // max |numeric dt rho - one-slice prediction| on the same run
  HeatFlow,      // max |dt rho - tau| on an MCF run of the perturbed torus
  Codazzi,       // perturbed torus, single slice
  Identify,      // product torus (a, b), single slice
  Diff1Sine,     // max |diff1 sin - cos| on a 1-d grid
  Zero,          // flat plane tension, identically zero
};

inline std::string to_string(Problem p) {
  switch (p) {
    case Problem::Theorem1: return "theorem1";
    case Problem::LhsAgreement: return "lhs_agreement";
    case Problem::HeatFlow: return "heat_flow";
    case Problem::Codazzi: return "codazzi";
    case Problem::Identify: return "identify";
    case Problem::Diff1Sine: return "diff1_sin";
    case Problem::Zero: return "zero";
  }
  return "unknown";
}

/// Three-state trajectory (t = 0, dt, 2 dt) with dt = dt_factor h^2.
inline flow::Trajectory<2> short_run(const geometry::Immersion<2>& imm, flow::FlowKind kind, double dt_factor) {
  const double h = std::min(imm.grid.spacing(0), imm.grid.spacing(1));
  flow::FlowConfig cfg;
  cfg.kind = kind;
  cfg.dt = dt_factor * h * h;
  cfg.t_end = 2.0 * cfg.dt;
  cfg.output_every = 1;
  return flow::run(imm, cfg);
}

/// Max-norm residual of one problem at an N x N (or N) resolution.
inline double problem_residual(Problem problem, int n, const StudyParams& p) {
  switch (problem) {
    case Problem::Theorem1:
    case Problem::LhsAgreement: {
      const auto traj = short_run(geometry::perturbed_torus(p.a, p.b, p.eps, p.seed, n, n), flow::FlowKind::SMCF,
                                  p.dt_factor);
      const auto r = residual_theorem1(traj, 1, Identity::Schrodinger);
      return problem == Problem::Theorem1 ? r.max_norm : r.extra.at("lhs_agreement_max");
    }
    case Problem::HeatFlow: {
      const auto traj =
          short_run(geometry::perturbed_torus(p.a, p.b, p.eps, p.seed, n, n), flow::FlowKind::MCF, p.dt_factor);
      return residual_theorem1(traj, 1, Identity::HeatFlow).max_norm;
    }
    case Problem::Codazzi: {
      const auto cache = geometry::fundamental_forms(geometry::perturbed_torus(p.a, p.b, p.eps, p.seed, n, n));
      return residual_codazzi(cache, geometry::gauss_field(cache)).max_norm;
    }
    case Problem::Identify: {
      const auto cache = geometry::fundamental_forms(geometry::product_torus(p.a, p.b, n, n));
      return residual_identify(cache, geometry::gauss_field(cache)).max_norm;
    }
    case Problem::Diff1Sine: {
      const geometry::PeriodicGrid<1> grid({n});
      std::vector<double> f(grid.node_count());
      for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::sin(grid.parameter(i)[0]);
      const auto df = geometry::diff1(grid, f, 0);
      double worst = 0.0;
      for (std::size_t i = 0; i < f.size(); ++i) worst = std::max(worst, std::abs(df[i] - std::cos(grid.parameter(i)[0])));
      return worst;
    }
    case Problem::Zero: {
      const auto cache = geometry::fundamental_forms(geometry::flat_plane(n, n));
      double worst = 0.0;
      for (const auto& t : tension(geometry::gauss_field(cache), cache)) worst = std::max(worst, t.norm());
      return worst;
    }
  }
  throw InvalidInput("unknown problem");
}

inline ConvergenceTable convergence_study(Problem problem, const std::vector<int>& resolutions,
                                          const StudyParams& params = {}) {
  if (resolutions.size() < 3) throw InvalidInput("convergence_study needs at least three resolutions");
  ConvergenceTable table;
  table.name = to_string(problem);
  table.params["a"] = std::to_string(params.a);
  table.params["b"] = std::to_string(params.b);
  table.params["eps"] = std::to_string(params.eps);
  table.params["seed"] = std::to_string(params.seed);
  table.params["dt_factor"] = std::to_string(params.dt_factor);
  for (int n : resolutions)
    table.rows.push_back({n, 2.0 * std::numbers::pi / n, problem_residual(problem, n, params)});
  return fit_order(std::move(table));
}

}  // namespace skewflow::verify
