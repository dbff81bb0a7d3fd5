#pragma once

#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "cogc/channel.hpp"
#include "cogc/code.hpp"
#include "cogc/errors.hpp"
#include "cogc/linalg.hpp"

// One cooperative communication attempt: clients exchange their updates along
// the code support, form partial sums with whatever arrived, and uplink them.
// Two decoders operate on the result: the standard combination-row decoder
// (all-or-nothing) and the stacked decoder that recovers whichever individual
// updates the received coefficient rows pin down.

namespace cogc {

// Row m holds client m's local model update.
using LocalUpdateSet = Matrix;

inline constexpr double kDecodeConsistencyTol = 1e-6;

struct PartialSum {
  int owner = 0;
  Vector coeffs;  // the perturbed coefficient row the sum was formed with
  Vector value;   // coeffs * updates
  bool complete = false;
};

struct RoundTranscript {
  RoundConnectivity connectivity;
  Matrix coeffs_received;              // (B o T) with rows zeroed when the uplink dropped
  std::vector<PartialSum> received;    // sums that reached the server, by ascending owner
  std::vector<int> complete_owners;    // clients whose sums are complete (sent or not)
};

inline RoundTranscript gradient_share(const CyclicCode& code, const RoundConnectivity& conn,
                                      const LocalUpdateSet& updates) {
  const int m_count = code.num_clients;
  require(conn.links.rows() == m_count && conn.links.cols() == m_count &&
              conn.uplinks.size() == m_count,
          ErrorCode::invalid_input, "gradient_share: connectivity shape mismatch");
  require(updates.rows() == m_count, ErrorCode::invalid_input,
          "gradient_share: one update row per client required");
  require(updates.allFinite(), ErrorCode::invalid_input, "gradient_share: non-finite update");

  RoundTranscript out;
  out.connectivity = conn;

  const Matrix perturbed = code.coeffs.cwiseProduct(conn.links.cast<double>());
  out.coeffs_received = perturbed;

  for (int m = 0; m < m_count; ++m) {
    bool complete = true;
    for (int k : neighbor_sets(code, m).senders)
      if (conn.links(m, k) == 0) complete = false;
    if (complete) out.complete_owners.push_back(m);

    if (conn.uplinks(m) == 0) {
      out.coeffs_received.row(m).setZero();
      continue;
    }
    PartialSum sum;
    sum.owner = m;
    sum.coeffs = perturbed.row(m).transpose();
    sum.value = (perturbed.row(m) * updates).transpose();
    sum.complete = complete;
    out.received.push_back(std::move(sum));
  }
  return out;
}

enum class DecodeKind { kFullViaGc, kFullViaPlus, kPartial, kFailure };
enum class DecodeMode { kExact, kPaperApprox };

inline const char* to_string(DecodeKind kind) {
  switch (kind) {
    case DecodeKind::kFullViaGc: return "full_gc";
    case DecodeKind::kFullViaPlus: return "full_plus";
    case DecodeKind::kPartial: return "partial";
    case DecodeKind::kFailure: return "failure";
  }
  return "unknown";
}

struct DecodeOutcome {
  DecodeKind kind = DecodeKind::kFailure;
  std::vector<int> decoded;            // ascending client ids
  std::map<int, Vector> recovered;     // individually recovered updates
  std::optional<Vector> global_update;
};

// Standard decoder: succeeds iff at least M-s complete sums arrived, in which
// case the combination row reproduces the exact mean of all M updates.
inline DecodeOutcome gc_decode(const CyclicCode& code, const RoundTranscript& transcript) {
  const int m_count = code.num_clients;
  const int s = code.straggler_tolerance;

  std::set<int> contributors;  // complete sums that reached the server
  std::map<int, const PartialSum*> by_owner;
  for (const auto& sum : transcript.received) by_owner[sum.owner] = &sum;
  for (int m : transcript.complete_owners)
    if (by_owner.count(m)) contributors.insert(m);

  DecodeOutcome out;
  if (static_cast<int>(contributors.size()) < m_count - s) return out;

  // Straggler pattern: the non-contributors, padded to exactly s entries
  // from the highest client indices (the recovered sum does not depend on
  // the padding; this fixes a deterministic choice).
  std::set<int> pattern;
  for (int m = 0; m < m_count; ++m)
    if (!contributors.count(m)) pattern.insert(m);
  for (int m = m_count - 1; m >= 0 && static_cast<int>(pattern.size()) < s; --m) pattern.insert(m);

  const CombinationRow row =
      combination_vector(code, std::vector<int>(pattern.begin(), pattern.end()));

  const auto dim = transcript.received.empty() ? 0 : transcript.received.front().value.size();
  Vector update = Vector::Zero(dim);
  for (int m = 0; m < m_count; ++m) {
    if (row.weights(m) == 0.0) continue;
    update += row.weights(m) * by_owner.at(m)->value;
  }
  update /= static_cast<double>(m_count);

  out.kind = DecodeKind::kFullViaGc;
  out.decoded.resize(static_cast<std::size_t>(m_count));
  for (int m = 0; m < m_count; ++m) out.decoded[static_cast<std::size_t>(m)] = m;
  out.global_update = std::move(update);
  return out;
}

struct AttemptRecord {
  CyclicCode code;
  RoundTranscript transcript;
};

struct StackedTranscript {
  std::vector<AttemptRecord> attempts;
  int num_clients = 0;
  Eigen::Index dim = 0;

  // Vertically stacked coefficient rows, zero rows (unreceived) retained so
  // row index i*M+m always addresses attempt i, client m.
  Matrix stacked_coeffs() const {
    const auto t = static_cast<Eigen::Index>(attempts.size());
    Matrix stacked(t * num_clients, num_clients);
    for (Eigen::Index i = 0; i < t; ++i)
      stacked.middleRows(i * num_clients, num_clients) =
          attempts[static_cast<std::size_t>(i)].transcript.coeffs_received;
    return stacked;
  }

  std::vector<bool> row_received() const {
    std::vector<bool> flags;
    for (const auto& attempt : attempts)
      for (int m = 0; m < num_clients; ++m)
        flags.push_back(attempt.transcript.connectivity.uplinks(m) != 0);
    return flags;
  }
};

inline StackedTranscript stack_transcripts(std::vector<AttemptRecord> attempts) {
  require(!attempts.empty(), ErrorCode::invalid_input, "stack_transcripts: no attempts");
  StackedTranscript out;
  out.num_clients = attempts.front().code.num_clients;
  for (const auto& attempt : attempts) {
    require(attempt.code.num_clients == out.num_clients, ErrorCode::invalid_input,
            "stack_transcripts: mismatched client count");
    for (const auto& sum : attempt.transcript.received) {
      if (out.dim == 0) out.dim = sum.value.size();
      require(sum.value.size() == out.dim, ErrorCode::invalid_input,
              "stack_transcripts: mismatched update dimension");
    }
  }
  out.attempts = std::move(attempts);
  return out;
}

namespace detail {

inline std::pair<Matrix, Matrix> received_rows(const StackedTranscript& stacked) {
  Eigen::Index count = 0;
  for (const auto& attempt : stacked.attempts)
    count += static_cast<Eigen::Index>(attempt.transcript.received.size());
  Matrix coeffs(count, stacked.num_clients);
  Matrix values(count, stacked.dim);
  Eigen::Index r = 0;
  for (const auto& attempt : stacked.attempts)
    for (const auto& sum : attempt.transcript.received) {
      coeffs.row(r) = sum.coeffs.transpose();
      values.row(r) = sum.value.transpose();
      ++r;
    }
  return {std::move(coeffs), std::move(values)};
}

inline DecodeOutcome solve_for(const std::vector<int>& decodable, const Matrix& coeffs,
                               const Matrix& values, int m_count) {
  DecodeOutcome out;
  if (decodable.empty()) return out;

  const Matrix solution = min_norm_solve(coeffs, values);
  const double scale = std::max(1.0, values.size() == 0 ? 0.0 : values.cwiseAbs().maxCoeff());
  const double residual = (coeffs * solution - values).cwiseAbs().maxCoeff();
  require(residual <= kDecodeConsistencyTol * scale, ErrorCode::numerical_inconsistency,
          "gc_plus_decode: received sums inconsistent with coefficients");

  out.decoded = decodable;
  Vector update = Vector::Zero(values.cols());
  for (int m : decodable) {
    out.recovered[m] = solution.row(m).transpose();
    update += solution.row(m).transpose();
  }
  update /= static_cast<double>(decodable.size());
  out.global_update = std::move(update);
  out.kind = static_cast<int>(decodable.size()) == m_count ? DecodeKind::kFullViaPlus
                                                           : DecodeKind::kPartial;
  return out;
}

}  // namespace detail

// Stacked decoder. If any single attempt already admits the standard decode,
// that result is returned. Otherwise:
//   kExact       client i is decodable iff appending unit row e_i to the
//                received coefficient rows does not increase the rank.
//   kPaperApprox echelon-form detection: decodable iff the echelon form has
//                fewer nonzero columns than nonzero rows. Kept verbatim for
//                fidelity comparisons against the exact rule.
inline DecodeOutcome gc_plus_decode(const StackedTranscript& stacked,
                                    DecodeMode mode = DecodeMode::kExact) {
  require(!stacked.attempts.empty(), ErrorCode::invalid_input, "gc_plus_decode: empty stack");
  const int m_count = stacked.num_clients;

  for (const auto& attempt : stacked.attempts) {
    DecodeOutcome via_gc = gc_decode(attempt.code, attempt.transcript);
    if (via_gc.kind != DecodeKind::kFailure) return via_gc;
  }

  auto [coeffs, values] = detail::received_rows(stacked);
  if (coeffs.rows() == 0) return {};

  if (mode == DecodeMode::kExact) {
    const int base_rank = numerical_rank(coeffs);
    std::vector<int> decodable;
    Matrix probe(coeffs.rows() + 1, m_count);
    probe.topRows(coeffs.rows()) = coeffs;
    for (int i = 0; i < m_count; ++i) {
      probe.row(coeffs.rows()) = Eigen::RowVectorXd::Unit(m_count, i);
      if (numerical_rank(probe) == base_rank) decodable.push_back(i);
    }
    return detail::solve_for(decodable, coeffs, values, m_count);
  }

  const Rref echelon = reduced_row_echelon(stacked.stacked_coeffs());
  std::vector<int> nonzero_cols;
  for (int c = 0; c < m_count; ++c)
    if ((echelon.echelon.col(c).array() != 0.0).any()) nonzero_cols.push_back(c);
  Eigen::Index nonzero_rows = 0;
  for (Eigen::Index r = 0; r < echelon.echelon.rows(); ++r)
    if ((echelon.echelon.row(r).array() != 0.0).any()) ++nonzero_rows;

  if (static_cast<Eigen::Index>(nonzero_cols.size()) < nonzero_rows)
    return detail::solve_for(nonzero_cols, coeffs, values, m_count);
  return {};
}

}  // namespace cogc
