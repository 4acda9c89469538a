#pragma once

// Exterior algebra of R^n: lexicographic multi-index bookkeeping, dense
// multivectors of a fixed degree, wedge products and the induced metric.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "skewflow/errors.hpp"

namespace skewflow::exterior {

inline std::size_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::size_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::size_t>(n - k + i) / static_cast<std::size_t>(i);
  return r;
}

/// All p-subsets of {0,..,n-1} in lexicographic order.
inline std::vector<std::vector<int>> enumerate_subsets(int p, int n) {
  std::vector<std::vector<int>> out;
  if (p < 0 || p > n) return out;
  out.reserve(binomial(n, p));
  std::vector<int> cur(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) cur[static_cast<std::size_t>(i)] = i;
  while (true) {
    out.push_back(cur);
    int i = p - 1;
    while (i >= 0 && cur[static_cast<std::size_t>(i)] == n - p + i) --i;
    if (i < 0) break;
    ++cur[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < p; ++j) cur[static_cast<std::size_t>(j)] = cur[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

/// Position of a strictly increasing subset of {0,..,n-1} in enumerate_subsets.
inline std::size_t subset_ordinal(std::span<const int> members, int n) {
  const int p = static_cast<int>(members.size());
  std::size_t rank = 0;
  int prev = -1;
  for (int i = 0; i < p; ++i) {
    const int c = members[static_cast<std::size_t>(i)];
    if (c <= prev || c >= n) throw InvalidInput("multi-index members must be strictly increasing and < n");
    for (int j = prev + 1; j < c; ++j) rank += binomial(n - 1 - j, p - 1 - i);
    prev = c;
  }
  return rank;
}

/// A basis index set e_{i1} ^ ... ^ e_{ip}. Members are zero-based.
class MultiIndex {
 public:
  MultiIndex(int n, std::vector<int> members) : n_(n), members_(std::move(members)) {
    ordinal_ = subset_ordinal(members_, n_);
  }

  static MultiIndex from_ordinal(int p, int n, std::size_t ordinal) {
    auto all = enumerate_subsets(p, n);
    if (ordinal >= all.size()) throw InvalidInput("multi-index ordinal out of range");
    return MultiIndex(n, all[ordinal]);
  }

  int n() const { return n_; }
  int degree() const { return static_cast<int>(members_.size()); }
  const std::vector<int>& members() const { return members_; }
  std::size_t ordinal() const { return ordinal_; }

 private:
  int n_;
  std::vector<int> members_;
  std::size_t ordinal_ = 0;
};

/// Sorts a wedge word of distinct indices in place and returns the sign of
/// the sorting permutation, or 0 if an index repeats.
inline int sort_wedge_word(std::vector<int>& word) {
  int sign = 1;
  for (std::size_t i = 1; i < word.size(); ++i) {
    for (std::size_t j = i; j > 0 && word[j - 1] >= word[j]; --j) {
      if (word[j - 1] == word[j]) return 0;
      std::swap(word[j - 1], word[j]);
      sign = -sign;
    }
  }
  return sign;
}

/// Element of Lambda^p R^n stored densely over the lexicographic basis.
class MultiVector {
 public:
  MultiVector() = default;
  MultiVector(int n, int p) : n_(n), p_(p), coeffs_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(binomial(n, p)))) {
    if (p < 0 || p > n) throw InvalidInput("degree must lie in [0, n]");
  }
  MultiVector(int n, int p, Eigen::VectorXd coeffs) : n_(n), p_(p), coeffs_(std::move(coeffs)) {
    if (p < 0 || p > n) throw InvalidInput("degree must lie in [0, n]");
    if (static_cast<std::size_t>(coeffs_.size()) != binomial(n, p))
      throw InvalidInput("coefficient vector length must equal C(n,p)");
  }

  static MultiVector zero(int n, int p) { return {n, p}; }

  /// Basis blade for an arbitrary word of indices; the word is sorted with
  /// the permutation sign applied.
  static MultiVector blade(int n, std::vector<int> word) {
    MultiVector out(n, static_cast<int>(word.size()));
    const int sign = sort_wedge_word(word);
    if (sign != 0) out.coeffs_[static_cast<Eigen::Index>(subset_ordinal(word, n))] = sign;
    return out;
  }

  /// Degree-1 multivector with the given components.
  static MultiVector vector(const Eigen::VectorXd& v) {
    return {static_cast<int>(v.size()), 1, v};
  }

  int n() const { return n_; }
  int degree() const { return p_; }
  std::size_t size() const { return static_cast<std::size_t>(coeffs_.size()); }
  const Eigen::VectorXd& coeffs() const { return coeffs_; }
  Eigen::VectorXd& coeffs() { return coeffs_; }

  double operator[](std::size_t ordinal) const { return coeffs_[static_cast<Eigen::Index>(ordinal)]; }
  double coeff(const std::vector<int>& members) const {
    return coeffs_[static_cast<Eigen::Index>(subset_ordinal(members, n_))];
  }

  MultiVector& operator+=(const MultiVector& o) {
    check_same_space(o);
    coeffs_ += o.coeffs_;
    return *this;
  }
  MultiVector& operator-=(const MultiVector& o) {
    check_same_space(o);
    coeffs_ -= o.coeffs_;
    return *this;
  }
  MultiVector& operator*=(double s) {
    coeffs_ *= s;
    return *this;
  }

  friend MultiVector operator+(MultiVector a, const MultiVector& b) { return a += b; }
  friend MultiVector operator-(MultiVector a, const MultiVector& b) { return a -= b; }
  friend MultiVector operator*(MultiVector a, double s) { return a *= s; }
  friend MultiVector operator*(double s, MultiVector a) { return a *= s; }
  friend MultiVector operator-(MultiVector a) { return a *= -1.0; }

  void check_same_space(const MultiVector& o) const {
    if (n_ != o.n_ || p_ != o.p_)
      throw InvalidInput("multivectors live in different spaces: (n,p)=(" + std::to_string(n_) + "," +
                         std::to_string(p_) + ") vs (" + std::to_string(o.n_) + "," + std::to_string(o.p_) + ")");
  }

 private:
  int n_ = 0;
  int p_ = 0;
  Eigen::VectorXd coeffs_;
};

/// v_1 ^ ... ^ v_m for the columns of an n x m matrix. Each coefficient is
/// the m x m minor on the corresponding row set.
inline MultiVector wedge_vectors(const Eigen::MatrixXd& columns) {
  const int n = static_cast<int>(columns.rows());
  const int m = static_cast<int>(columns.cols());
  if (m > n) throw InvalidInput("cannot wedge more than n vectors in R^n");
  MultiVector out(n, m);
  const auto subsets = enumerate_subsets(m, n);
  Eigen::MatrixXd minor(m, m);
  for (std::size_t s = 0; s < subsets.size(); ++s) {
    for (int r = 0; r < m; ++r) minor.row(r) = columns.row(subsets[s][static_cast<std::size_t>(r)]);
    out.coeffs()[static_cast<Eigen::Index>(s)] = m == 0 ? 1.0 : minor.determinant();
  }
  return out;
}

inline MultiVector wedge_vectors(const std::vector<Eigen::VectorXd>& vectors) {
  if (vectors.empty()) throw InvalidInput("wedge_vectors needs at least one vector");
  const auto n = vectors.front().size();
  Eigen::MatrixXd cols(n, static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t j = 0; j < vectors.size(); ++j) {
    if (vectors[j].size() != n) throw InvalidInput("wedge_vectors: vectors have different lengths");
    cols.col(static_cast<Eigen::Index>(j)) = vectors[j];
  }
  return wedge_vectors(cols);
}

inline MultiVector wedge(const MultiVector& a, const MultiVector& b) {
  if (a.n() != b.n()) throw InvalidInput("wedge: operands live in different ambient dimensions");
  const int n = a.n();
  const int p = a.degree();
  const int q = b.degree();
  if (p + q > n) throw DegreeOverflow("wedge: degree " + std::to_string(p + q) + " exceeds n=" + std::to_string(n));
  MultiVector out(n, p + q);
  const auto left = enumerate_subsets(p, n);
  const auto right = enumerate_subsets(q, n);
  std::vector<int> word;
  for (std::size_t i = 0; i < left.size(); ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; j < right.size(); ++j) {
      if (b[j] == 0.0) continue;
      word = left[i];
      word.insert(word.end(), right[j].begin(), right[j].end());
      const int sign = sort_wedge_word(word);
      if (sign == 0) continue;
      out.coeffs()[static_cast<Eigen::Index>(subset_ordinal(word, n))] += sign * a[i] * b[j];
    }
  }
  return out;
}

/// The metric induced from R^n; the lexicographic basis is orthonormal.
inline double inner(const MultiVector& a, const MultiVector& b) {
  if (a.n() != b.n() || a.degree() != b.degree())
    throw InvalidInput("inner: operands must share ambient dimension and degree");
  return a.coeffs().dot(b.coeffs());
}

inline double norm(const MultiVector& a) { return std::sqrt(inner(a, a)); }

/// |p12 p34 - p13 p24 + p14 p23| for a bivector in R^4; zero iff simple.
inline double simplicity_residual(const MultiVector& a) {
  if (a.degree() != 2 || a.n() != 4)
    throw UnsupportedCase("simplicity_residual is implemented for bivectors in R^4 only");
  // lexicographic order: 12 13 14 23 24 34
  const auto& c = a.coeffs();
  return std::abs(c[0] * c[5] - c[1] * c[4] + c[2] * c[3]);
}

}  // namespace skewflow::exterior
