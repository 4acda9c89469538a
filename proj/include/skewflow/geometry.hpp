#pragma once

// Codimension-two immersions sampled on periodic parameter grids:
// closed curves in R^3 (M = 1) and tori in R^4 (M = 2).

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "skewflow/errors.hpp"
#include "skewflow/exterior.hpp"
#include "skewflow/grassmann.hpp"
#include "skewflow/parallel.hpp"

namespace skewflow::geometry {

inline constexpr double kDegeneracyThreshold = 1e-6;

template <int M>
using Point = Eigen::Matrix<double, M + 2, 1>;

template <int M>
class PeriodicGrid {
  static_assert(M == 1 || M == 2, "supported parameter dimensions are 1 and 2");

 public:
  static constexpr int dim = M;

  PeriodicGrid() = default;
  explicit PeriodicGrid(std::array<int, M> sizes) : PeriodicGrid(sizes, uniform_periods()) {}
  PeriodicGrid(std::array<int, M> sizes, std::array<double, M> periods) : sizes_(sizes), periods_(periods) {
    for (int d = 0; d < M; ++d) {
      if (sizes_[d] < 8 || sizes_[d] % 2 != 0)
        throw InvalidInput("grid sizes must be even and >= 8, got " + std::to_string(sizes_[d]));
      if (!(periods_[d] > 0)) throw InvalidInput("grid periods must be positive");
    }
  }

  const std::array<int, M>& sizes() const { return sizes_; }
  const std::array<double, M>& periods() const { return periods_; }
  double spacing(int d) const { return periods_[d] / sizes_[d]; }
  double cell_volume() const {
    double v = 1.0;
    for (int d = 0; d < M; ++d) v *= spacing(d);
    return v;
  }
  std::size_t node_count() const {
    std::size_t c = 1;
    for (int d = 0; d < M; ++d) c *= static_cast<std::size_t>(sizes_[d]);
    return c;
  }

  /// Row-major: the last parameter direction varies fastest.
  std::array<int, M> coords(std::size_t node) const {
    std::array<int, M> c{};
    for (int d = M - 1; d >= 0; --d) {
      c[d] = static_cast<int>(node % static_cast<std::size_t>(sizes_[d]));
      node /= static_cast<std::size_t>(sizes_[d]);
    }
    return c;
  }
  std::size_t index(const std::array<int, M>& c) const {
    std::size_t i = 0;
    for (int d = 0; d < M; ++d) i = i * static_cast<std::size_t>(sizes_[d]) + static_cast<std::size_t>(c[d]);
    return i;
  }
  std::array<double, M> parameter(std::size_t node) const {
    const auto c = coords(node);
    std::array<double, M> x{};
    for (int d = 0; d < M; ++d) x[d] = c[d] * spacing(d);
    return x;
  }

  /// Neighbor reached by integer offsets; `wraps` receives the number of
  /// periods crossed in each direction.
  std::size_t offset(std::size_t node, const std::array<int, M>& delta, std::array<int, M>* wraps = nullptr) const {
    return offset_from(coords(node), delta, wraps);
  }
  std::size_t offset_from(std::array<int, M> c, const std::array<int, M>& delta,
                          std::array<int, M>* wraps = nullptr) const {
    for (int d = 0; d < M; ++d) {
      const int raw = c[d] + delta[d];
      int w = 0;
      if (raw >= 0 && raw < sizes_[d]) {
        c[d] = raw;
      } else {
        w = raw >= 0 ? raw / sizes_[d] : -((-raw + sizes_[d] - 1) / sizes_[d]);
        c[d] = raw - w * sizes_[d];
      }
      if (wraps) (*wraps)[d] = w;
    }
    return index(c);
  }

  friend bool operator==(const PeriodicGrid&, const PeriodicGrid&) = default;

 private:
  static std::array<double, M> uniform_periods() {
    std::array<double, M> p{};
    p.fill(2.0 * std::numbers::pi);
    return p;
  }

  std::array<int, M> sizes_{};
  std::array<double, M> periods_{};
};

/// Node positions of F: Sigma -> R^{M+2}. `wrap_shift[d]` is added to F when
/// crossing one period in direction d; it is zero for closed immersions and
/// lets straight lines and planes live on periodic grids.
template <int M>
struct Immersion {
  static constexpr int m = M;
  static constexpr int n = M + 2;

  PeriodicGrid<M> grid;
  std::vector<Point<M>> F;
  std::array<Point<M>, M> wrap_shift = zero_shifts();

  static std::array<Point<M>, M> zero_shifts() {
    std::array<Point<M>, M> s;
    for (auto& v : s) v.setZero();
    return s;
  }

  Point<M> at(std::size_t node, const std::array<int, M>& delta) const {
    return at_coords(grid.coords(node), delta);
  }
  Point<M> at_coords(const std::array<int, M>& c, const std::array<int, M>& delta) const {
    std::array<int, M> wraps{};
    Point<M> p = F[grid.offset_from(c, delta, &wraps)];
    for (int d = 0; d < M; ++d)
      if (wraps[d] != 0) p += wraps[d] * wrap_shift[d];
    return p;
  }
};

// -- finite differences -------------------------------------------------------

template <int M>
std::array<int, M> unit_offset(int dir, int step) {
  std::array<int, M> d{};
  d[dir] = step;
  return d;
}

/// Centered first difference of a periodic per-node field.
template <int M, class T>
std::vector<T> diff1(const PeriodicGrid<M>& grid, const std::vector<T>& f, int dir) {
  if (f.size() != grid.node_count()) throw InvalidInput("diff1: field size does not match grid");
  const double inv = 1.0 / (2.0 * grid.spacing(dir));
  std::vector<T> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto& fp = f[grid.offset(i, unit_offset<M>(dir, 1))];
    const auto& fm = f[grid.offset(i, unit_offset<M>(dir, -1))];
    out[i] = (fp - fm) * inv;
  }
  return out;
}

/// Second difference: 3-point stencil for dir_a == dir_b, 4-point cross otherwise.
template <int M, class T>
std::vector<T> diff2(const PeriodicGrid<M>& grid, const std::vector<T>& f, int dir_a, int dir_b) {
  if (f.size() != grid.node_count()) throw InvalidInput("diff2: field size does not match grid");
  std::vector<T> out(f.size());
  if (dir_a == dir_b) {
    const double h = grid.spacing(dir_a);
    const double inv = 1.0 / (h * h);
    for (std::size_t i = 0; i < f.size(); ++i) {
      const auto& fp = f[grid.offset(i, unit_offset<M>(dir_a, 1))];
      const auto& fm = f[grid.offset(i, unit_offset<M>(dir_a, -1))];
      out[i] = (fp + fm - 2.0 * f[i]) * inv;
    }
    return out;
  }
  const double inv = 1.0 / (4.0 * grid.spacing(dir_a) * grid.spacing(dir_b));
  for (std::size_t i = 0; i < f.size(); ++i) {
    std::array<int, M> pp{}, pm{}, mp{}, mm{};
    pp[dir_a] = 1, pp[dir_b] = 1;
    pm[dir_a] = 1, pm[dir_b] = -1;
    mp[dir_a] = -1, mp[dir_b] = 1;
    mm[dir_a] = -1, mm[dir_b] = -1;
    out[i] = (f[grid.offset(i, pp)] - f[grid.offset(i, pm)] - f[grid.offset(i, mp)] + f[grid.offset(i, mm)]) * inv;
  }
  return out;
}

// -- per-node geometry --------------------------------------------------------

/// Everything the flow and the verifier need at one node, in fixed-size form.
template <int M>
struct LocalGeometry {
  static constexpr int N = M + 2;
  using Vec = Eigen::Matrix<double, N, 1>;
  using Mat = Eigen::Matrix<double, M, M>;

  Eigen::Matrix<double, N, M> tangents;  // d_i F
  Eigen::Matrix<double, N, M> e;
  Eigen::Matrix<double, N, 2> nu;
  Mat g;
  Mat g_inv;
  Mat r_inv;  // e = tangents * r_inv (Gram-Schmidt triangle)
  double sqrt_det_g = 0;
  double min_singular_value = 0;
  std::array<Mat, 2> A;  // A[alpha](i,j) = <D_ij F, nu_alpha>
  Vec H;

  /// J w = <w,nu_1> nu_2 - <w,nu_2> nu_1 for the positively oriented frame.
  Vec rotate_normal(const Vec& w) const {
    return nu.col(0).dot(w) * nu.col(1) - nu.col(1).dot(w) * nu.col(0);
  }
  Vec normal_part(const Vec& w) const { return nu * (nu.transpose() * w); }

  grassmann::AdaptedFrame frame() const {
    return grassmann::AdaptedFrame{Eigen::MatrixXd(e), Eigen::MatrixXd(nu)};
  }
};

namespace detail {

template <int M>
double min_eigenvalue(const Eigen::Matrix<double, M, M>& g) {
  if constexpr (M == 1) {
    return g(0, 0);
  } else {
    const double tr = g(0, 0) + g(1, 1);
    const double det = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
    const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
    return 0.5 * tr - disc;
  }
}

/// Gram-Schmidt on the tangents, then the normal completion: the ambient
/// axis with the largest normal projection first, then the axis whose
/// normal projection keeps the most length after removing nu_1; nu_2 is
/// negated if the frame comes out negatively oriented.
template <int M>
void complete_frame(LocalGeometry<M>& geo, std::size_t node) {
  constexpr int N = M + 2;
  using Vec = typename LocalGeometry<M>::Vec;
  geo.g = geo.tangents.transpose() * geo.tangents;
  const double lmin = min_eigenvalue<M>(geo.g);
  geo.min_singular_value = std::sqrt(std::max(0.0, lmin));
  if (!(geo.min_singular_value >= kDegeneracyThreshold))
    throw DegenerateImmersion(node, "smallest tangent singular value " + std::to_string(geo.min_singular_value) +
                                        " below threshold");
  geo.g_inv = geo.g.inverse();
  geo.sqrt_det_g = std::sqrt(geo.g.determinant());

  Eigen::Matrix<double, M, M> r = Eigen::Matrix<double, M, M>::Zero();
  for (int i = 0; i < M; ++i) {
    Vec v = geo.tangents.col(i);
    for (int j = 0; j < i; ++j) {
      r(j, i) = geo.e.col(j).dot(v);
      v -= r(j, i) * geo.e.col(j);
    }
    r(i, i) = v.norm();
    geo.e.col(i) = v / r(i, i);
  }
  geo.r_inv = r.inverse();

  // columns of the normal projector are the normal parts of the ambient axes
  const Eigen::Matrix<double, N, N> proj = Eigen::Matrix<double, N, N>::Identity() - geo.e * geo.e.transpose();
  int first = 0;
  for (int a = 1; a < N; ++a)
    if (proj(a, a) > proj(first, first)) first = a;
  const Vec nu1 = proj.col(first) / std::sqrt(proj(first, first));
  int second = -1;
  double best = -1.0;
  for (int a = 0; a < N; ++a) {
    if (a == first) continue;
    const double along = nu1[a];  // <proj e_a, nu1> = <e_a, nu1>
    const double len = proj(a, a) - along * along;
    if (len > best) best = len, second = a;
  }
  const Vec nu2 = proj.col(second) - nu1[second] * nu1;
  geo.nu.col(0) = nu1;
  geo.nu.col(1) = nu2 / nu2.norm();
  Eigen::Matrix<double, N, N> q;
  q << geo.e, geo.nu;
  if (q.determinant() < 0) geo.nu.col(1) *= -1.0;
}

}  // namespace detail

/// Tangents, frame, metric, second fundamental form and mean curvature at a node.
template <int M>
LocalGeometry<M> local_geometry(const Immersion<M>& imm, std::size_t node) {
  LocalGeometry<M> geo;
  const auto& grid = imm.grid;
  const Point<M>& f0 = imm.F[node];
  const auto c = grid.coords(node);
  const auto& sizes = grid.sizes();
  const bool closed = std::all_of(imm.wrap_shift.begin(), imm.wrap_shift.end(),
                                  [](const Point<M>& s) { return s.isZero(0.0); });
  // neighbor at offsets in {-1, 0, 1}^M
  auto at = [&](const std::array<int, M>& delta) -> Point<M> {
    std::size_t idx = 0;
    std::array<int, M> wraps{};
    for (int d = 0; d < M; ++d) {
      int v = c[d] + delta[d];
      if (v < 0) v += sizes[d], wraps[d] = -1;
      else if (v >= sizes[d]) v -= sizes[d], wraps[d] = 1;
      idx = idx * static_cast<std::size_t>(sizes[d]) + static_cast<std::size_t>(v);
    }
    if (closed) return imm.F[idx];
    Point<M> p = imm.F[idx];
    for (int d = 0; d < M; ++d) p += wraps[d] * imm.wrap_shift[d];
    return p;
  };
  std::array<Point<M>, M> d2;
  for (int i = 0; i < M; ++i) {
    const double h = grid.spacing(i);
    const Point<M> fp = at(unit_offset<M>(i, 1));
    const Point<M> fm = at(unit_offset<M>(i, -1));
    geo.tangents.col(i) = (fp - fm) / (2.0 * h);
    d2[i] = (fp + fm - 2.0 * f0) / (h * h);
  }
  detail::complete_frame<M>(geo, node);

  for (int al = 0; al < 2; ++al)
    for (int i = 0; i < M; ++i) geo.A[al](i, i) = d2[i].dot(geo.nu.col(al));
  if constexpr (M == 2) {
    const Point<M> cross = (at({1, 1}) - at({1, -1}) - at({-1, 1}) + at({-1, -1})) /
                           (4.0 * grid.spacing(0) * grid.spacing(1));
    for (int al = 0; al < 2; ++al) geo.A[al](0, 1) = geo.A[al](1, 0) = cross.dot(geo.nu.col(al));
  }
  geo.H.setZero();
  for (int al = 0; al < 2; ++al) geo.H += (geo.g_inv.cwiseProduct(geo.A[al])).sum() * geo.nu.col(al);
  return geo;
}

/// Frozen geometry of one immersion: local data at every node plus the
/// normal derivative of the mean curvature, which needs neighboring nodes.
template <int M>
struct GeometryCache {
  PeriodicGrid<M> grid;
  std::vector<LocalGeometry<M>> nodes;
  std::vector<grassmann::AdaptedFrame> frames;
  std::vector<std::array<Point<M>, M>> gradH_perp;  // normal part of d_i H

  std::size_t size() const { return nodes.size(); }
};

template <int M>
std::vector<LocalGeometry<M>> local_geometry_field(const Immersion<M>& imm) {
  if (imm.F.size() != imm.grid.node_count()) throw InvalidInput("immersion size does not match its grid");
  std::vector<LocalGeometry<M>> out(imm.F.size());
  parallel_for(out.size(), [&](std::size_t i) { out[i] = local_geometry(imm, i); });
  return out;
}

template <int M>
std::vector<grassmann::AdaptedFrame> frame_field(const Immersion<M>& imm) {
  const auto local = local_geometry_field(imm);
  std::vector<grassmann::AdaptedFrame> frames;
  frames.reserve(local.size());
  for (const auto& g : local) frames.push_back(g.frame());
  return frames;
}

template <int M>
GeometryCache<M> fundamental_forms(const Immersion<M>& imm) {
  GeometryCache<M> cache;
  cache.grid = imm.grid;
  cache.nodes = local_geometry_field(imm);
  cache.frames.reserve(cache.nodes.size());
  for (const auto& g : cache.nodes) cache.frames.push_back(g.frame());

  std::vector<Point<M>> H(cache.nodes.size());
  for (std::size_t i = 0; i < H.size(); ++i) H[i] = cache.nodes[i].H;
  cache.gradH_perp.resize(H.size());
  for (int d = 0; d < M; ++d) {
    const auto dH = diff1(imm.grid, H, d);
    for (std::size_t i = 0; i < H.size(); ++i) cache.gradH_perp[i][d] = cache.nodes[i].normal_part(dH[i]);
  }
  return cache;
}

/// Length (M = 1) or area (M = 2) by the rectangle rule.
template <int M>
double volume(const Immersion<M>& imm) {
  double sum = 0.0;
  for (std::size_t i = 0; i < imm.F.size(); ++i) {
    Eigen::Matrix<double, M + 2, M> t;
    for (int d = 0; d < M; ++d)
      t.col(d) = (imm.at(i, unit_offset<M>(d, 1)) - imm.at(i, unit_offset<M>(d, -1))) / (2.0 * imm.grid.spacing(d));
    sum += std::sqrt((t.transpose() * t).determinant());
  }
  return sum * imm.grid.cell_volume();
}

template <int M>
double volume(const GeometryCache<M>& cache) {
  double sum = 0.0;
  for (const auto& g : cache.nodes) sum += g.sqrt_det_g;
  return sum * cache.grid.cell_volume();
}

template <int M>
double min_singular_value(const Immersion<M>& imm) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < imm.F.size(); ++i) {
    Eigen::Matrix<double, M + 2, M> t;
    for (int d = 0; d < M; ++d)
      t.col(d) = (imm.at(i, unit_offset<M>(d, 1)) - imm.at(i, unit_offset<M>(d, -1))) / (2.0 * imm.grid.spacing(d));
    Eigen::Matrix<double, M, M> g = t.transpose() * t;
    best = std::min(best, std::sqrt(std::max(0.0, detail::min_eigenvalue<M>(g))));
  }
  return best;
}

// -- Gauss map ----------------------------------------------------------------

struct GaussField {
  std::vector<grassmann::GrassmannPoint> points;

  std::size_t size() const { return points.size(); }
  /// Plain coefficient vectors, convenient for finite differences.
  std::vector<Eigen::VectorXd> coefficients() const {
    std::vector<Eigen::VectorXd> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(p.xi.coeffs());
    return out;
  }
};

inline GaussField gauss_field(const std::vector<grassmann::AdaptedFrame>& frames) {
  GaussField out;
  out.points.reserve(frames.size());
  for (const auto& f : frames) out.points.push_back(grassmann::GrassmannPoint{exterior::wedge_vectors(f.e), f});
  return out;
}

template <int M>
GaussField gauss_field(const Immersion<M>& imm) {
  return gauss_field(frame_field(imm));
}

template <int M>
GaussField gauss_field(const GeometryCache<M>& cache) {
  return gauss_field(cache.frames);
}

// -- builders -----------------------------------------------------------------

template <int M, class Fn>
Immersion<M> sample(const PeriodicGrid<M>& grid, Fn&& fn) {
  Immersion<M> imm;
  imm.grid = grid;
  imm.F.resize(grid.node_count());
  for (std::size_t i = 0; i < imm.F.size(); ++i) imm.F[i] = fn(grid.parameter(i));
  return imm;
}

inline Immersion<1> circle(double r, int n) {
  if (!(r > 0)) throw InvalidInput("circle radius must be positive");
  return sample<1>(PeriodicGrid<1>({n}), [r](const std::array<double, 1>& x) {
    return Point<1>(r * std::cos(x[0]), r * std::sin(x[0]), 0.0);
  });
}

/// Trefoil knot; a non-planar closed curve with non-constant curvature.
inline Immersion<1> trefoil(int n) {
  return sample<1>(PeriodicGrid<1>({n}), [](const std::array<double, 1>& x) {
    const double s = x[0];
    return Point<1>(std::sin(s) + 2.0 * std::sin(2.0 * s), std::cos(s) - 2.0 * std::cos(2.0 * s), -std::sin(3.0 * s));
  });
}

/// The x-axis in R^3 on a periodic grid (F(s + 2 pi) = F(s) + 2 pi e_1).
inline Immersion<1> straight_line(int n) {
  auto imm = sample<1>(PeriodicGrid<1>({n}), [](const std::array<double, 1>& x) { return Point<1>(x[0], 0.0, 0.0); });
  imm.wrap_shift[0] = Point<1>(2.0 * std::numbers::pi, 0.0, 0.0);
  return imm;
}

/// The (x1,x2)-plane in R^4 on a periodic grid.
inline Immersion<2> flat_plane(int n1, int n2) {
  auto imm = sample<2>(PeriodicGrid<2>({n1, n2}),
                       [](const std::array<double, 2>& x) { return Point<2>(x[0], x[1], 0.0, 0.0); });
  imm.wrap_shift[0] = Point<2>(2.0 * std::numbers::pi, 0.0, 0.0, 0.0);
  imm.wrap_shift[1] = Point<2>(0.0, 2.0 * std::numbers::pi, 0.0, 0.0);
  return imm;
}

inline Point<2> product_torus_point(double a, double b, double x, double y) {
  return Point<2>(a * std::cos(x), a * std::sin(x), b * std::cos(y), b * std::sin(y));
}

inline Immersion<2> product_torus(double a, double b, int n1, int n2) {
  if (!(a > 0 && b > 0)) throw InvalidInput("torus radii must be positive");
  return sample<2>(PeriodicGrid<2>({n1, n2}),
                   [a, b](const std::array<double, 2>& x) { return product_torus_point(a, b, x[0], x[1]); });
}

/// Smooth normal perturbation of the product torus: the radial directions
/// of both circle factors are displaced by seeded low-frequency Fourier
/// modes. The field depends only on (x, y), so every resolution samples
/// the same immersion.
struct TorusPerturbation {
  static constexpr std::array<std::array<int, 2>, 4> modes{{{1, 0}, {0, 1}, {1, 1}, {1, -1}}};
  std::array<std::array<double, 4>, 2> cos_coeff{};
  std::array<std::array<double, 4>, 2> sin_coeff{};

  static TorusPerturbation seeded(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    TorusPerturbation p;
    for (int al = 0; al < 2; ++al)
      for (std::size_t k = 0; k < modes.size(); ++k) {
        p.cos_coeff[al][k] = u(rng);
        p.sin_coeff[al][k] = u(rng);
      }
    return p;
  }

  double amplitude(int alpha, double x, double y) const {
    double s = 0.0;
    for (std::size_t k = 0; k < modes.size(); ++k) {
      const double phase = modes[k][0] * x + modes[k][1] * y;
      s += cos_coeff[alpha][k] * std::cos(phase) + sin_coeff[alpha][k] * std::sin(phase);
    }
    return s;
  }
};

inline Immersion<2> perturbed_torus(double a, double b, double eps, std::uint64_t seed, int n1, int n2) {
  if (!(a > 0 && b > 0)) throw InvalidInput("torus radii must be positive");
  const auto pert = TorusPerturbation::seeded(seed);
  return sample<2>(PeriodicGrid<2>({n1, n2}), [=](const std::array<double, 2>& p) {
    const double x = p[0], y = p[1];
    const Point<2> r1(std::cos(x), std::sin(x), 0.0, 0.0);
    const Point<2> r2(0.0, 0.0, std::cos(y), std::sin(y));
    return Point<2>(product_torus_point(a, b, x, y) + eps * (pert.amplitude(0, x, y) * r1 + pert.amplitude(1, x, y) * r2));
  });
}

// -- CSV ----------------------------------------------------------------------

/// Reads node positions (columns x1..xn, one node per row, row-major grid
/// order). A non-numeric first line is treated as a header.
template <int M>
Immersion<M> load_csv(const std::string& path, const PeriodicGrid<M>& grid) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open immersion file '" + path + "'");
  Immersion<M> imm;
  imm.grid = grid;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (lineno == 1) continue;
      throw InvalidInput(path + ":" + std::to_string(lineno) + ": non-numeric value");
    }
    if (row.size() != static_cast<std::size_t>(M + 2))
      throw InvalidInput(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(M + 2) + " columns");
    Point<M> p;
    for (int c = 0; c < M + 2; ++c) p[c] = row[static_cast<std::size_t>(c)];
    imm.F.push_back(p);
  }
  if (imm.F.size() != grid.node_count())
    throw InvalidInput(path + ": expected " + std::to_string(grid.node_count()) + " nodes, found " +
                       std::to_string(imm.F.size()));
  return imm;
}

template <int M>
void write_csv(const std::string& path, const Immersion<M>& imm) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write '" + path + "'");
  out.precision(17);
  for (int c = 0; c < M + 2; ++c) out << (c ? "," : "") << "x" << (c + 1);
  out << "\n";
  for (const auto& p : imm.F) {
    for (int c = 0; c < M + 2; ++c) out << (c ? "," : "") << p[c];
    out << "\n";
  }
}

}  // namespace skewflow::geometry
