#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cogc/errors.hpp"
#include "cogc/linalg.hpp"
#include "cogc/rng.hpp"

// Cyclic gradient codes: an M x M coefficient matrix B whose row m is
// supported on the cyclic window {m, m+1, ..., m+s} (mod M), built so that
// every row lies in the null space of a random s x M parity matrix H whose
// columns sum to zero. Any s missing rows can then be compensated by a
// combination vector a with a'B = 1'.

namespace cogc {

inline constexpr double kCombinationTol = 1e-8;

struct CodeParams {
  int num_clients = 0;          // M
  int straggler_tolerance = 0;  // s
  std::uint64_t seed = 0;

  void validate() const {
    require(num_clients >= 1, ErrorCode::invalid_params, "code: M must be >= 1");
    require(straggler_tolerance >= 0, ErrorCode::invalid_params, "code: s must be >= 0");
    require(straggler_tolerance + 1 <= num_clients, ErrorCode::invalid_params,
            "code: s + 1 must not exceed M");
  }
};

struct CyclicCode {
  int num_clients = 0;
  int straggler_tolerance = 0;
  std::uint64_t seed = 0;
  Matrix coeffs;  // B, M x M; diagonal normalized to 1
  Matrix parity;  // H, s x M; rows of B lie in null(H); H * 1 = 0

  // Cyclic support of row m: {m, m+1, ..., m+s} mod M.
  std::vector<int> support(int row) const {
    std::vector<int> cols(static_cast<std::size_t>(straggler_tolerance) + 1);
    for (int j = 0; j <= straggler_tolerance; ++j)
      cols[static_cast<std::size_t>(j)] = (row + j) % num_clients;
    return cols;
  }

  bool in_support(int row, int col) const {
    const int offset = ((col - row) % num_clients + num_clients) % num_clients;
    return offset <= straggler_tolerance;
  }
};

inline CyclicCode generate_code(const CodeParams& params) {
  params.validate();
  const int m_count = params.num_clients;
  const int s = params.straggler_tolerance;

  CyclicCode code;
  code.num_clients = m_count;
  code.straggler_tolerance = s;
  code.seed = params.seed;

  code.parity.resize(s, m_count);
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j + 1 < m_count; ++j)
      code.parity(i, j) = rng::normal_at(params.seed, rng::kCodeEntries,
                                         static_cast<std::uint64_t>(i),
                                         static_cast<std::uint64_t>(j));
    // Last column closes every parity row, placing the all-ones vector in
    // the null space.
    code.parity(i, m_count - 1) = -code.parity.row(i).head(m_count - 1).sum();
  }

  code.coeffs = Matrix::Zero(m_count, m_count);
  for (int row = 0; row < m_count; ++row) {
    const auto cols = code.support(row);
    Vector x;
    if (s == 0) {
      x = Vector::Ones(1);
    } else {
      Matrix h_sub(s, s + 1);
      for (int j = 0; j <= s; ++j) h_sub.col(j) = code.parity.col(cols[static_cast<std::size_t>(j)]);
      Eigen::FullPivLU<Matrix> lu(h_sub);
      const Matrix kernel = lu.kernel();
      require(kernel.cols() == 1, ErrorCode::numerical_inconsistency,
              "generate_code: degenerate parity draw");
      x = kernel.col(0);
      require(std::abs(x(0)) > 1e-12 * x.norm(), ErrorCode::numerical_inconsistency,
              "generate_code: vanishing leading coefficient");
      x /= x(0);
    }
    for (int j = 0; j <= s; ++j) code.coeffs(row, cols[static_cast<std::size_t>(j)]) = x(j);
  }
  return code;
}

struct CombinationRow {
  Vector weights;               // a; zero on the straggler set, a'B = 1'
  std::vector<int> stragglers;  // the pattern this row compensates
};

// Solve for the combination row of one observed straggler pattern. Computed
// on demand; the full combination matrix (one row per pattern) is never
// materialized.
inline CombinationRow combination_vector(const CyclicCode& code, std::vector<int> stragglers) {
  const int m_count = code.num_clients;
  std::sort(stragglers.begin(), stragglers.end());
  stragglers.erase(std::unique(stragglers.begin(), stragglers.end()), stragglers.end());
  for (int m : stragglers)
    require(m >= 0 && m < m_count, ErrorCode::invalid_input, "combination_vector: client out of range");
  require(static_cast<int>(stragglers.size()) <= code.straggler_tolerance,
          ErrorCode::too_many_stragglers,
          "combination_vector: straggler set larger than the code tolerance");

  std::vector<int> available;
  available.reserve(static_cast<std::size_t>(m_count));
  for (int m = 0; m < m_count; ++m)
    if (!std::binary_search(stragglers.begin(), stragglers.end(), m)) available.push_back(m);

  Matrix bt(m_count, static_cast<Eigen::Index>(available.size()));
  for (std::size_t j = 0; j < available.size(); ++j)
    bt.col(static_cast<Eigen::Index>(j)) = code.coeffs.row(available[j]).transpose();

  const Vector ones = Vector::Ones(m_count);
  const Vector partial = min_norm_solve(bt, ones);
  const double residual = (bt * partial - ones).cwiseAbs().maxCoeff();
  require(residual <= kCombinationTol, ErrorCode::decode_infeasible,
          "combination_vector: restricted system numerically singular");

  CombinationRow row;
  row.weights = Vector::Zero(m_count);
  for (std::size_t j = 0; j < available.size(); ++j)
    row.weights(available[j]) = partial(static_cast<Eigen::Index>(j));
  row.stragglers = std::move(stragglers);
  return row;
}

struct RankReport {
  int numerical_rank = 0;
  std::optional<int> predicted_rank;   // min{M, M-s+n} when enough rows are unperturbed
  std::optional<int> nonconflicting;   // n: matched erased entries (distinct rows/columns)
  double pivot_tolerance = kRankRelTol;
};

// Count the maximum number of erased-entry-induced nonzeros that are pairwise
// in distinct rows and distinct columns. Rows with identical erasure patterns
// are capped at min{group size, pattern size, rank_cap} before matching, since
// rows of one pattern can contribute at most that much independent content.
inline int count_nonconflicting(const std::vector<std::vector<int>>& erased_cols, int rank_cap) {
  std::map<std::vector<int>, int> groups;
  for (const auto& pattern : erased_cols) {
    if (pattern.empty()) continue;
    auto key = pattern;
    std::sort(key.begin(), key.end());
    key.erase(std::unique(key.begin(), key.end()), key.end());
    ++groups[key];
  }

  std::vector<std::vector<int>> adj;
  int max_col = -1;
  for (const auto& [pattern, count] : groups) {
    const int keep = std::min({count, static_cast<int>(pattern.size()), rank_cap});
    for (int i = 0; i < keep; ++i) adj.push_back(pattern);
    max_col = std::max(max_col, pattern.back());
  }
  if (adj.empty()) return 0;
  return max_bipartite_matching(adj, max_col + 1);
}

// Overload on a binary matrix whose rows are the perturbed rows.
inline int count_nonconflicting(const IntMatrix& pattern, int rank_cap) {
  std::vector<std::vector<int>> rows(static_cast<std::size_t>(pattern.rows()));
  for (Eigen::Index i = 0; i < pattern.rows(); ++i)
    for (Eigen::Index j = 0; j < pattern.cols(); ++j)
      if (pattern(i, j) != 0) rows[static_cast<std::size_t>(i)].push_back(static_cast<int>(j));
  return count_nonconflicting(rows, rank_cap);
}

// Rank of B with client-to-client erasures applied (mask zeroes entries; the
// diagonal must stay intact since a client always hears itself). When at
// least M-s rows are unperturbed the rank admits the closed-form prediction
// min{M, M-s+n}; the report carries both routes.
inline RankReport rank_after_client_outages(const CyclicCode& code, const IntMatrix& mask) {
  const int m_count = code.num_clients;
  const int s = code.straggler_tolerance;
  require(mask.rows() == m_count && mask.cols() == m_count, ErrorCode::invalid_mask,
          "rank_after_client_outages: mask shape mismatch");
  for (int m = 0; m < m_count; ++m)
    require(mask(m, m) != 0, ErrorCode::invalid_mask,
            "rank_after_client_outages: mask diagonal must be all ones");

  const Matrix perturbed = code.coeffs.cwiseProduct(
      mask.cast<double>().cwiseMin(1.0).cwiseMax(0.0));

  RankReport report;
  report.numerical_rank = numerical_rank(perturbed);

  std::vector<std::vector<int>> erased;
  int unperturbed = 0;
  for (int row = 0; row < m_count; ++row) {
    std::vector<int> cols;
    for (int col : code.support(row))
      if (mask(row, col) == 0) cols.push_back(col);
    if (cols.empty())
      ++unperturbed;
    else
      erased.push_back(std::move(cols));
  }
  if (unperturbed >= m_count - s) {
    const int n = count_nonconflicting(erased, m_count - s);
    report.nonconflicting = n;
    report.predicted_rank = std::min(m_count, m_count - s + n);
  }
  return report;
}

// Rank of t vertically stacked independently drawn codes (no erasures):
// each code contributes M-s-1 fresh dimensions beyond the shared all-ones
// direction, capped at M.
inline int predicted_stack_rank(int num_clients, int straggler_tolerance, int attempts) {
  require(attempts >= 1, ErrorCode::invalid_input, "predicted_stack_rank: attempts must be >= 1");
  return std::min((num_clients - straggler_tolerance - 1) * attempts + 1, num_clients);
}

}  // namespace cogc
