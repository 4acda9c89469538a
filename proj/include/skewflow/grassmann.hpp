#pragma once

// The oriented Grassmannian G(m,k) realized as unit simple m-vectors in
// Lambda^m R^n, together with its tangent space in an adapted frame.

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "skewflow/errors.hpp"
#include "skewflow/exterior.hpp"

namespace skewflow::grassmann {

using exterior::MultiVector;

/// Oriented orthonormal basis (e_1..e_m | nu_1..nu_k) of R^n. The columns of
/// `e` span the plane, the columns of `nu` its orthogonal complement.
struct AdaptedFrame {
  Eigen::MatrixXd e;
  Eigen::MatrixXd nu;

  int n() const { return static_cast<int>(e.rows()); }
  int m() const { return static_cast<int>(e.cols()); }
  int k() const { return static_cast<int>(nu.cols()); }

  Eigen::MatrixXd full() const {
    Eigen::MatrixXd q(n(), n());
    q << e, nu;
    return q;
  }

  /// Builds a frame and checks orthonormality and positive orientation.
  static AdaptedFrame make(Eigen::MatrixXd e, Eigen::MatrixXd nu, double tol = 1e-10);
};

inline void validate(const AdaptedFrame& f, double tol = 1e-10) {
  if (f.e.rows() != f.nu.rows()) throw InvalidFrame("tangent and normal parts live in different R^n");
  if (f.m() + f.k() != f.n()) throw InvalidFrame("frame must have exactly n = m + k vectors");
  if (f.m() < 1 || f.k() < 1) throw InvalidFrame("frame needs m >= 1 and k >= 1");
  const Eigen::MatrixXd q = f.full();
  const double err = (q.transpose() * q - Eigen::MatrixXd::Identity(f.n(), f.n())).cwiseAbs().maxCoeff();
  if (err > tol) throw InvalidFrame("frame is not orthonormal (max Gram error " + std::to_string(err) + ")");
  if (q.determinant() <= 0.0) throw InvalidFrame("frame is not positively oriented");
}

inline AdaptedFrame AdaptedFrame::make(Eigen::MatrixXd e, Eigen::MatrixXd nu, double tol) {
  AdaptedFrame f{std::move(e), std::move(nu)};
  validate(f, tol);
  return f;
}

/// Orthonormalizes a seeded Gaussian n x n matrix; the last column is
/// negated if needed so the frame is positively oriented.
template <class Rng>
AdaptedFrame random_frame(int m, int k, Rng& rng) {
  const int n = m + k;
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd g(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) g(i, j) = gauss(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  if (q.determinant() < 0) q.col(n - 1) *= -1.0;
  return AdaptedFrame{q.leftCols(m), q.rightCols(k)};
}

/// A point of G as a unit simple m-vector, optionally with the frame that produced it.
struct GrassmannPoint {
  MultiVector xi;
  std::optional<AdaptedFrame> frame;
};

inline GrassmannPoint embed(const AdaptedFrame& frame) {
  validate(frame);
  return {exterior::wedge_vectors(frame.e), frame};
}

/// Coefficients a(i, alpha) of e_i (x) nu_alpha, i.e. of E_{i alpha}.
struct TangentCoeffs {
  Eigen::MatrixXd a;

  static TangentCoeffs zero(int m, int k) { return {Eigen::MatrixXd::Zero(m, k)}; }

  int m() const { return static_cast<int>(a.rows()); }
  int k() const { return static_cast<int>(a.cols()); }
  double norm() const { return a.norm(); }
  double dot(const TangentCoeffs& o) const { return (a.array() * o.a.array()).sum(); }

  friend TangentCoeffs operator+(const TangentCoeffs& x, const TangentCoeffs& y) { return {x.a + y.a}; }
  friend TangentCoeffs operator-(const TangentCoeffs& x, const TangentCoeffs& y) { return {x.a - y.a}; }
  friend TangentCoeffs operator*(double s, const TangentCoeffs& x) { return {s * x.a}; }
};

/// E_{i alpha} = e_1 ^ .. ^ nu_alpha (slot i) ^ .. ^ e_m, ordered i-major.
inline std::vector<MultiVector> tangent_basis(const AdaptedFrame& frame) {
  std::vector<MultiVector> out;
  out.reserve(static_cast<std::size_t>(frame.m() * frame.k()));
  Eigen::MatrixXd cols = frame.e;
  for (int i = 0; i < frame.m(); ++i) {
    for (int al = 0; al < frame.k(); ++al) {
      cols.col(i) = frame.nu.col(al);
      out.push_back(exterior::wedge_vectors(cols));
    }
    cols.col(i) = frame.e.col(i);
  }
  return out;
}

inline std::size_t basis_slot(const AdaptedFrame& frame, int i, int alpha) {
  return static_cast<std::size_t>(i * frame.k() + alpha);
}

namespace detail {

inline void check_compatible(const AdaptedFrame& frame, const MultiVector& w) {
  if (w.n() != frame.n() || w.degree() != frame.m())
    throw InvalidInput("multivector does not match the frame's (n, m)");
}

inline TangentCoeffs project(const std::vector<MultiVector>& basis, int m, int k, const MultiVector& w) {
  TangentCoeffs c = TangentCoeffs::zero(m, k);
  for (int i = 0; i < m; ++i)
    for (int al = 0; al < k; ++al) c.a(i, al) = exterior::inner(w, basis[static_cast<std::size_t>(i * k + al)]);
  return c;
}

inline MultiVector combine(const std::vector<MultiVector>& basis, int n, int m, const TangentCoeffs& c) {
  MultiVector out(n, m);
  for (int i = 0; i < c.m(); ++i)
    for (int al = 0; al < c.k(); ++al) out.coeffs() += c.a(i, al) * basis[static_cast<std::size_t>(i * c.k() + al)].coeffs();
  return out;
}

}  // namespace detail

/// Orthogonal projection onto T_xi G expressed in the frame's tangent basis.
inline TangentCoeffs project_to_tangent(const AdaptedFrame& frame, const MultiVector& w) {
  detail::check_compatible(frame, w);
  return detail::project(tangent_basis(frame), frame.m(), frame.k(), w);
}

/// The identification xi (x) xi^perp -> T_xi G, e_i (x) nu_alpha -> E_{i alpha}.
inline MultiVector psi(const AdaptedFrame& frame, const TangentCoeffs& c) {
  if (c.m() != frame.m() || c.k() != frame.k()) throw InvalidInput("psi: coefficient shape does not match frame");
  return detail::combine(tangent_basis(frame), frame.n(), frame.m(), c);
}

inline TangentCoeffs psi_inv(const AdaptedFrame& frame, const MultiVector& v, double tol = 1e-8) {
  detail::check_compatible(frame, v);
  const auto basis = tangent_basis(frame);
  TangentCoeffs c = detail::project(basis, frame.m(), frame.k(), v);
  const double off = exterior::norm(v - detail::combine(basis, frame.n(), frame.m(), c));
  if (off > tol) throw NotTangent("psi_inv: multivector has a normal component of size " + std::to_string(off));
  return c;
}

/// Positive quarter turn in the normal plane: J nu_1 = s nu_2, J nu_2 = -s nu_1
/// with s the orientation sign of the frame (+1 for a valid frame).
inline Eigen::VectorXd normal_rotate(const AdaptedFrame& frame, const Eigen::VectorXd& w, double tol = 1e-8) {
  if (frame.k() != 2) throw UnsupportedCase("normal_rotate requires codimension two");
  if (w.size() != frame.n()) throw InvalidInput("normal_rotate: vector has wrong dimension");
  const double tangential = (frame.e.transpose() * w).norm();
  if (tangential > tol * std::max(1.0, w.norm()))
    throw NotNormal("normal_rotate: vector has tangential component " + std::to_string(tangential));
  const double s = frame.full().determinant() > 0 ? 1.0 : -1.0;
  const double w1 = frame.nu.col(0).dot(w);
  const double w2 = frame.nu.col(1).dot(w);
  return s * (w1 * frame.nu.col(1) - w2 * frame.nu.col(0));
}

/// Id (x) J on xi (x) xi^perp in an adapted frame.
inline TangentCoeffs jtilde_coeffs(const TangentCoeffs& c) {
  if (c.k() != 2) throw UnsupportedCase("jtilde is defined on G(m,2) only");
  TangentCoeffs out = TangentCoeffs::zero(c.m(), 2);
  out.a.col(0) = -c.a.col(1);
  out.a.col(1) = c.a.col(0);
  return out;
}

}  // namespace skewflow::grassmann
