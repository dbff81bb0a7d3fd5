#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cogc/errors.hpp"

namespace cogc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntMatrix = Eigen::MatrixXi;
using IntVector = Eigen::VectorXi;

// One knob for every rank decision in the library: a pivot (or entry) counts
// as nonzero only if its magnitude exceeds rel_tol * max|entry| of the input.
inline constexpr double kRankRelTol = 1e-10;

inline double pivot_threshold(const Matrix& a, double rel_tol) {
  if (a.size() == 0) return 0.0;
  return rel_tol * a.cwiseAbs().maxCoeff();
}

// Numerical rank by Gaussian elimination with partial pivoting.
inline int numerical_rank(Matrix a, double rel_tol = kRankRelTol) {
  if (a.size() == 0) return 0;
  require(a.allFinite(), ErrorCode::invalid_input, "numerical_rank: non-finite entries");
  require(rel_tol > 0.0, ErrorCode::invalid_input, "numerical_rank: tolerance must be positive");
  const double thr = pivot_threshold(a, rel_tol);
  if (thr == 0.0) return 0;  // zero matrix
  const Eigen::Index rows = a.rows(), cols = a.cols();
  Eigen::Index r = 0;
  for (Eigen::Index c = 0; c < cols && r < rows; ++c) {
    Eigen::Index p = 0;
    const double mag = a.col(c).tail(rows - r).cwiseAbs().maxCoeff(&p);
    if (mag <= thr) continue;
    p += r;
    if (p != r) a.row(p).swap(a.row(r));
    for (Eigen::Index i = r + 1; i < rows; ++i) {
      const double f = a(i, c) / a(r, c);
      if (f != 0.0) a.row(i).tail(cols - c) -= f * a.row(r).tail(cols - c);
      a(i, c) = 0.0;
    }
    ++r;
  }
  return static_cast<int>(r);
}

struct Rref {
  Matrix echelon;
  std::vector<int> pivot_cols;
  double threshold = 0.0;

  int rank() const { return static_cast<int>(pivot_cols.size()); }
};

// Reduced row echelon form, sharing the rank tolerance semantics above.
// Entries below the threshold are clamped to exact zero in the result.
inline Rref reduced_row_echelon(Matrix a, double rel_tol = kRankRelTol) {
  require(a.allFinite(), ErrorCode::invalid_input, "rref: non-finite entries");
  Rref out;
  out.threshold = pivot_threshold(a, rel_tol);
  const Eigen::Index rows = a.rows(), cols = a.cols();
  Eigen::Index r = 0;
  for (Eigen::Index c = 0; c < cols && r < rows; ++c) {
    Eigen::Index p = 0;
    const double mag = a.col(c).tail(rows - r).cwiseAbs().maxCoeff(&p);
    if (mag <= out.threshold) continue;
    p += r;
    if (p != r) a.row(p).swap(a.row(r));
    a.row(r) /= a(r, c);
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (i == r) continue;
      const double f = a(i, c);
      if (f != 0.0) a.row(i) -= f * a.row(r);
      a(i, c) = 0.0;
    }
    out.pivot_cols.push_back(static_cast<int>(c));
    ++r;
  }
  a = (a.cwiseAbs().array() > out.threshold).select(a, 0.0);
  out.echelon = std::move(a);
  return out;
}

// Minimum-norm least-squares solve (exact on consistent systems).
inline Matrix min_norm_solve(const Matrix& a, const Matrix& rhs) {
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(a);
  return cod.solve(rhs);
}

// Maximum bipartite matching (Kuhn's augmenting paths). adj[r] lists the
// column ids row r may match to.
inline int max_bipartite_matching(const std::vector<std::vector<int>>& adj, int num_cols) {
  std::vector<int> col_match(static_cast<std::size_t>(num_cols), -1);
  std::vector<char> visited;

  struct Augment {
    const std::vector<std::vector<int>>& adj;
    std::vector<int>& col_match;
    std::vector<char>& visited;
    bool operator()(int row) const {
      for (int c : adj[static_cast<std::size_t>(row)]) {
        if (visited[static_cast<std::size_t>(c)]) continue;
        visited[static_cast<std::size_t>(c)] = 1;
        if (col_match[static_cast<std::size_t>(c)] < 0 ||
            (*this)(col_match[static_cast<std::size_t>(c)])) {
          col_match[static_cast<std::size_t>(c)] = row;
          return true;
        }
      }
      return false;
    }
  };

  int matched = 0;
  Augment augment{adj, col_match, visited};
  for (int r = 0; r < static_cast<int>(adj.size()); ++r) {
    visited.assign(static_cast<std::size_t>(num_cols), 0);
    if (augment(r)) ++matched;
  }
  return matched;
}

}  // namespace cogc
