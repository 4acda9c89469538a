#pragma once

// Explicit time stepping of dF/dt = J H (skew mean curvature flow) and of
// dF/dt = H (mean curvature flow), plus the reduced radius ODE of product tori.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "skewflow/errors.hpp"
#include "skewflow/geometry.hpp"
#include "skewflow/parallel.hpp"

namespace skewflow::flow {

using geometry::Immersion;
using geometry::Point;

enum class FlowKind { SMCF, MCF };
enum class Scheme { RK4, Euler };

inline std::string to_string(FlowKind k) { return k == FlowKind::SMCF ? "SMCF" : "MCF"; }
inline std::string to_string(Scheme s) { return s == Scheme::RK4 ? "RK4" : "Euler"; }

struct FlowConfig {
  FlowKind kind = FlowKind::SMCF;
  double dt = 1e-3;
  double t_end = 0.0;
  Scheme scheme = Scheme::RK4;
  int output_every = 1;
  std::uint64_t seed = 0;
  // Each step is split into RK4/Euler substeps no longer than
  // stability_factor * h^2 (h = smallest grid spacing); <= 0 disables.
  double stability_factor = 0.1;

  void validate() const {
    if (!(dt > 0)) throw InvalidInput("flow.dt must be positive");
    if (!(t_end >= 0)) throw InvalidInput("flow.t_end must be non-negative");
    if (output_every < 1) throw InvalidInput("flow.output_every must be >= 1");
  }
};

template <int M>
struct FlowState {
  double t = 0.0;
  Immersion<M> imm;
};

template <int M>
struct Trajectory {
  std::vector<FlowState<M>> states;

  std::size_t size() const { return states.size(); }
  const FlowState<M>& operator[](std::size_t i) const { return states[i]; }
};

/// Per-node normal velocity: J H for SMCF, H for MCF.
template <int M>
std::vector<Point<M>> velocity(const Immersion<M>& imm, FlowKind kind) {
  if (imm.F.size() != imm.grid.node_count()) throw InvalidInput("immersion size does not match its grid");
  std::vector<Point<M>> v(imm.F.size());
  parallel_for(v.size(), [&](std::size_t i) {
    const auto geo = geometry::local_geometry(imm, i);
    v[i] = kind == FlowKind::SMCF ? geo.rotate_normal(geo.H) : geo.H;
  });
  return v;
}

namespace detail {

template <int M>
Immersion<M> displaced(const Immersion<M>& base, const std::vector<Point<M>>& v, double scale) {
  Immersion<M> out = base;
  for (std::size_t i = 0; i < out.F.size(); ++i) out.F[i] += scale * v[i];
  return out;
}

template <int M>
FlowState<M> substep(const FlowState<M>& state, FlowKind kind, Scheme scheme, double dt) {
  if (scheme == Scheme::Euler) return {state.t + dt, displaced(state.imm, velocity(state.imm, kind), dt)};
  const auto k1 = velocity(state.imm, kind);
  const auto k2 = velocity(displaced(state.imm, k1, 0.5 * dt), kind);
  const auto k3 = velocity(displaced(state.imm, k2, 0.5 * dt), kind);
  const auto k4 = velocity(displaced(state.imm, k3, dt), kind);
  FlowState<M> next{state.t + dt, state.imm};
  for (std::size_t i = 0; i < next.imm.F.size(); ++i)
    next.imm.F[i] += (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return next;
}

}  // namespace detail

/// Number of substeps a step of length dt is split into on this grid.
template <int M>
long substep_count(const geometry::PeriodicGrid<M>& grid, const FlowConfig& config, double dt) {
  if (config.stability_factor <= 0) return 1;
  double h = grid.spacing(0);
  for (int d = 1; d < M; ++d) h = std::min(h, grid.spacing(d));
  const double cap = config.stability_factor * h * h;
  return std::max(1L, static_cast<long>(std::ceil(dt / cap - 1e-9)));
}

/// Advances by config.dt (in substep_count equal substeps). Degeneracy is
/// reported with the time of the substep being attempted.
template <int M>
FlowState<M> step(const FlowState<M>& state, const FlowConfig& config) {
  config.validate();
  const long parts = substep_count(state.imm.grid, config, config.dt);
  const double h = config.dt / static_cast<double>(parts);
  FlowState<M> cur = state;
  for (long p = 0; p < parts; ++p) {
    try {
      cur = detail::substep(cur, config.kind, config.scheme, h);
    } catch (const DegenerateImmersion& e) {
      throw e.at_time(cur.t);
    }
  }
  cur.t = state.t + config.dt;
  return cur;
}

inline long step_count(const FlowConfig& config) {
  return std::lround(std::ceil(config.t_end / config.dt - 1e-9));
}

/// Integrates to t_end; the final step is shortened to land on t_end.
/// States are recorded at t = 0, every output_every steps, and at t_end.
template <int M>
Trajectory<M> run(const Immersion<M>& imm, const FlowConfig& config) {
  config.validate();
  Trajectory<M> traj;
  FlowState<M> state{0.0, imm};
  traj.states.push_back(state);
  const long steps = step_count(config);
  for (long s = 1; s <= steps; ++s) {
    FlowConfig cfg = config;
    cfg.dt = std::min(config.dt, config.t_end - state.t);
    state = step(state, cfg);
    if (s == steps) state.t = config.t_end;
    if (s % config.output_every == 0 || s == steps) traj.states.push_back(state);
  }
  return traj;
}

// -- product torus reduction --------------------------------------------------

struct RadiiSample {
  double t;
  double a;
  double b;
};

/// RK4 integration of a' = -s/b, b' = s/a: the SMCF of the product torus
/// F = (a cos x, a sin x, b cos y, b sin y) reduces to this system, with
/// s = +1 for the positively oriented quarter turn.
inline std::vector<RadiiSample> product_torus_ode_oracle(double a0, double b0, double t_end, double dt,
                                                         double s = 1.0) {
  if (!(a0 > 0 && b0 > 0)) throw InvalidInput("initial radii must be positive");
  if (!(dt > 0) || !(t_end >= 0)) throw InvalidInput("need dt > 0 and t_end >= 0");
  auto rhs = [s](double a, double b) { return std::pair{-s / b, s / a}; };
  std::vector<RadiiSample> out{{0.0, a0, b0}};
  double a = a0, b = b0, t = 0.0;
  const long steps = std::lround(std::ceil(t_end / dt - 1e-9));
  for (long k = 0; k < steps; ++k) {
    const double h = std::min(dt, t_end - t);
    const auto [ka1, kb1] = rhs(a, b);
    const auto [ka2, kb2] = rhs(a + 0.5 * h * ka1, b + 0.5 * h * kb1);
    const auto [ka3, kb3] = rhs(a + 0.5 * h * ka2, b + 0.5 * h * kb2);
    const auto [ka4, kb4] = rhs(a + h * ka3, b + h * kb3);
    a += h / 6.0 * (ka1 + 2 * ka2 + 2 * ka3 + ka4);
    b += h / 6.0 * (kb1 + 2 * kb2 + 2 * kb3 + kb4);
    t = k + 1 == steps ? t_end : t + h;
    if (!(a > 0 && b > 0) || !std::isfinite(a) || !std::isfinite(b))
      throw BlowUp("torus radius left (0, inf) at t=" + std::to_string(t));
    out.push_back({t, a, b});
  }
  return out;
}

/// Least-squares radii of a numerically evolved product torus: the mean
/// distances from the (x1,x2) and (x3,x4) axes.
struct TorusFit {
  double a = 0;
  double b = 0;
  double max_deviation = 0;  // max |radius - fitted radius| over nodes
};

inline TorusFit fit_product_torus(const Immersion<2>& imm) {
  TorusFit fit;
  const double count = static_cast<double>(imm.F.size());
  for (const auto& p : imm.F) {
    fit.a += std::hypot(p[0], p[1]) / count;
    fit.b += std::hypot(p[2], p[3]) / count;
  }
  for (const auto& p : imm.F)
    fit.max_deviation =
        std::max({fit.max_deviation, std::abs(std::hypot(p[0], p[1]) - fit.a), std::abs(std::hypot(p[2], p[3]) - fit.b)});
  return fit;
}

}  // namespace skewflow::flow
