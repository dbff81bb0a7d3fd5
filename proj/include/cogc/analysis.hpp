#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "cogc/channel.hpp"
#include "cogc/errors.hpp"
#include "cogc/linalg.hpp"

// Closed-form analytics: the per-round outage probability of the standard
// decoder split into its three disjoint failure scenarios, retry counts,
// cost-efficient code search, recovery bounds for the stacked decoder, the
// convergence bound evaluator, and the information leakage of partial sums.

namespace cogc {

// P(number of failures = k) for independent events with the given failure
// probabilities, by convolution.
inline std::vector<double> failure_count_pmf(const std::vector<double>& fail_probs) {
  std::vector<double> pmf{1.0};
  pmf.reserve(fail_probs.size() + 1);
  for (const double p : fail_probs) {
    pmf.push_back(0.0);
    for (std::size_t k = pmf.size() - 1; k > 0; --k)
      pmf[k] = pmf[k] * (1.0 - p) + pmf[k - 1] * p;
    pmf[0] *= (1.0 - p);
  }
  return pmf;
}

inline double tail_above(const std::vector<double>& pmf, int threshold) {
  double total = 0.0;
  for (std::size_t k = 0; k < pmf.size(); ++k)
    if (static_cast<int>(k) > threshold) total += pmf[k];
  return total;
}

struct OutageBreakdown {
  double p1 = 0.0;  // more than s clients hold incomplete sums
  double p2 = 0.0;  // all sums complete, more than s uplinks drop
  double p3 = 0.0;  // 1..s incomplete sums and too many uplink drops among the rest
  double p_o = 0.0;
  Vector p11;             // per-client probability of an incomplete sum
  double p21 = 0.0;       // all gradient-sharing links survive
  double p22 = 0.0;       // more than s uplink failures
  double prod_p11 = 0.0;  // probability every client holds an incomplete sum
};

// The third failure scenario counts uplink drops among the clients that still
// hold complete sums. kVerbal uses the uplink outage probabilities for that
// count; kPrinted reproduces, for comparison, a variant that reuses the
// client-to-client failure expression (indexed by the recipient set) without
// the complement factor.
enum class Subcase3Form { kVerbal, kPrinted };

inline OutageBreakdown outage_probability(const NetworkModel& net, int s,
                                          Subcase3Form form = Subcase3Form::kVerbal) {
  net.validate();
  const int m_count = net.num_clients();
  require(m_count >= 2, ErrorCode::invalid_params, "outage_probability: M must be >= 2");
  require(s >= 0 && s <= m_count - 1, ErrorCode::invalid_params,
          "outage_probability: s must lie in [0, M-1]");

  OutageBreakdown out;
  out.p11 = Vector::Zero(m_count);
  std::vector<double> incomplete(static_cast<std::size_t>(m_count));
  std::vector<double> printed_fail(static_cast<std::size_t>(m_count));
  for (int m = 0; m < m_count; ++m) {
    double hear_all = 1.0;
    double reach_all = 1.0;
    for (int j = 1; j <= s; ++j) {
      hear_all *= 1.0 - net.outage_c2c(m, (m + j) % m_count);               // senders of m
      reach_all *= 1.0 - net.outage_c2c(m, ((m - j) % m_count + m_count) % m_count);
    }
    out.p11(m) = 1.0 - hear_all;
    incomplete[static_cast<std::size_t>(m)] = out.p11(m);
    printed_fail[static_cast<std::size_t>(m)] = 1.0 - reach_all;
  }
  out.prod_p11 = out.p11.prod();

  out.p1 = tail_above(failure_count_pmf(incomplete), s);

  out.p21 = (1.0 - out.p11.array()).prod();
  std::vector<double> uplink(static_cast<std::size_t>(m_count));
  for (int m = 0; m < m_count; ++m) uplink[static_cast<std::size_t>(m)] = net.outage_up(m);
  out.p22 = tail_above(failure_count_pmf(uplink), s);
  out.p2 = out.p21 * out.p22;

  // Joint distribution over (incomplete count v, uplink drops f among the
  // complete clients); exact for heterogeneous probabilities.
  std::vector<std::vector<double>> joint(
      static_cast<std::size_t>(m_count) + 1,
      std::vector<double>(static_cast<std::size_t>(m_count) + 1, 0.0));
  joint[0][0] = 1.0;
  for (int m = 0; m < m_count; ++m) {
    const double inc = incomplete[static_cast<std::size_t>(m)];
    const double drop = form == Subcase3Form::kVerbal
                            ? (1.0 - inc) * net.outage_up(m)
                            : (1.0 - inc) * printed_fail[static_cast<std::size_t>(m)];
    const double keep = form == Subcase3Form::kVerbal ? (1.0 - inc) * (1.0 - net.outage_up(m))
                                                      : (1.0 - inc);
    std::vector<std::vector<double>> next(
        static_cast<std::size_t>(m_count) + 1,
        std::vector<double>(static_cast<std::size_t>(m_count) + 1, 0.0));
    for (int v = 0; v <= m; ++v)
      for (int f = 0; f <= m; ++f) {
        const double mass = joint[static_cast<std::size_t>(v)][static_cast<std::size_t>(f)];
        if (mass == 0.0) continue;
        next[static_cast<std::size_t>(v) + 1][static_cast<std::size_t>(f)] += mass * inc;
        next[static_cast<std::size_t>(v)][static_cast<std::size_t>(f) + 1] += mass * drop;
        next[static_cast<std::size_t>(v)][static_cast<std::size_t>(f)] += mass * keep;
      }
    joint = std::move(next);
  }
  double p3 = 0.0;
  for (int v = 1; v <= s; ++v)
    for (int f = 0; f <= m_count; ++f)
      if (f > s - v) p3 += joint[static_cast<std::size_t>(v)][static_cast<std::size_t>(f)];
  out.p3 = p3;

  out.p_o = out.p1 + out.p2 + out.p3;
  return out;
}

// Retries before a successful round follow a geometric law with success
// probability 1 - P_O.
inline double expected_retries(double p_o) {
  require(p_o >= 0.0 && p_o <= 1.0, ErrorCode::invalid_input,
          "expected_retries: probability out of range");
  require(p_o < 1.0, ErrorCode::divergent_retries,
          "expected_retries: outage probability 1 never succeeds");
  return 1.0 / (1.0 - p_o);
}

// Smallest s whose outage probability meets the target. The outage is not
// monotone in s, so the scan is exhaustive over s = 0..M-1.
inline int cost_efficient_s(const NetworkModel& net, double target) {
  require(target > 0.0 && target <= 1.0, ErrorCode::invalid_params,
          "cost_efficient_s: target must lie in (0, 1]");
  const int m_count = net.num_clients();
  for (int s = 0; s <= m_count - 1; ++s)
    if (outage_probability(net, s).p_o <= target) return s;
  fail(ErrorCode::infeasible_target, "cost_efficient_s: no s meets the target outage");
}

// Gradient sharing costs s transmissions per client; each complete sum adds
// one uplink transmission.
inline long transmissions_per_round(int num_clients, int s, int complete_count) {
  require(num_clients >= 1 && s >= 0 && s <= num_clients - 1, ErrorCode::invalid_input,
          "transmissions_per_round: invalid code parameters");
  require(complete_count >= 0 && complete_count <= num_clients, ErrorCode::invalid_input,
          "transmissions_per_round: complete count out of range");
  return static_cast<long>(s) * num_clients + complete_count;
}

inline double binomial_coefficient(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return c;
}

// Lower bound on full recovery with the stacked decoder under a homogeneous
// erasure probability p: at least M of the (M-s)*t designated rows must
// survive. Returns 0 when the stack is too short for the sum to be non-empty.
inline double full_recovery_lower_bound(int num_clients, int s, int attempts, double p) {
  require(num_clients >= 1 && s >= 0 && s <= num_clients - 1, ErrorCode::invalid_input,
          "full_recovery_lower_bound: invalid code parameters");
  require(attempts >= 1, ErrorCode::invalid_input, "full_recovery_lower_bound: attempts >= 1");
  require(p >= 0.0 && p <= 1.0, ErrorCode::invalid_input,
          "full_recovery_lower_bound: probability out of range");
  const int n = (num_clients - s) * attempts;
  if (n < num_clients) return 0.0;
  double total = 0.0;
  for (int v = num_clients; v <= n; ++v)
    total += binomial_coefficient(n, v) * std::pow(p, n - v) * std::pow(1.0 - p, v);
  return std::min(total, 1.0);
}

inline double harmonic_number(int n) {
  double h = 0.0;
  for (int m = 1; m <= n; ++m) h += 1.0 / static_cast<double>(m);
  return h;
}

// Lower bound K* on the harmonic-mean number of decoded clients per
// successful stacked round: 1/K* = Pl * H(M-1) / (1 - min{P_O^t, 1-Pl}) + 1/M
// with Pl the full-recovery lower bound above.
inline double k_star(int num_clients, int s, int attempts, double p, double p_o) {
  require(p_o >= 0.0 && p_o <= 1.0, ErrorCode::invalid_input, "k_star: P_O out of range");
  const double lower = full_recovery_lower_bound(num_clients, s, attempts, p);
  const double denom = 1.0 - std::min(std::pow(p_o, attempts), 1.0 - lower);
  require(denom > 0.0, ErrorCode::undefined_bound, "k_star: vanishing denominator");
  const double inverse =
      lower * harmonic_number(num_clients - 1) / denom + 1.0 / static_cast<double>(num_clients);
  return 1.0 / inverse;
}

// Polylogarithm of negative integer order, closed forms on [0, 1).
inline double polylog_neg(int order, double z) {
  require(z >= 0.0 && z < 1.0, ErrorCode::domain_error, "polylog_neg: z must lie in [0, 1)");
  const double w = 1.0 - z;
  switch (order) {
    case 1: return z / (w * w);
    case 2: return z * (1.0 + z) / (w * w * w);
    case 3: return z * (1.0 + 4.0 * z + z * z) / (w * w * w * w);
    case 4: return z * (1.0 + z) * (1.0 + 10.0 * z + z * z) / (w * w * w * w * w);
    default: fail(ErrorCode::invalid_input, "polylog_neg: order must be 1..4");
  }
}

// Moment E[R^v] of the geometric retry count R (support 1, 2, ...) with
// failure probability z per attempt.
inline double retry_moment(int order, double z) {
  if (z == 0.0) return 1.0;
  return (1.0 - z) / z * polylog_neg(order, z);
}

struct ConvergenceBoundParams {
  int num_clients = 0;    // M
  int local_steps = 0;    // I
  int rounds = 0;         // T
  double smoothness = 0;  // L
  double data_variance = 0;
  Vector heterogeneity;   // per-client squared gradient dissimilarity bounds
  Vector outage_up;       // per-client uplink outage probabilities
  double outage_overall = 0;  // P_O
  double objective_gap = 0;   // |F* - F(g_0)|

  void validate() const {
    require(num_clients >= 1 && local_steps >= 1 && rounds >= 1, ErrorCode::invalid_params,
            "convergence_bound: M, I, T must be positive");
    require(smoothness > 0.0, ErrorCode::invalid_params, "convergence_bound: L must be positive");
    require(data_variance >= 0.0 && objective_gap >= 0.0, ErrorCode::invalid_params,
            "convergence_bound: variance and gap must be nonnegative");
    require(heterogeneity.size() == num_clients && outage_up.size() == num_clients,
            ErrorCode::invalid_params, "convergence_bound: per-client vectors must have length M");
    require(outage_overall >= 0.0 && outage_overall < 1.0, ErrorCode::invalid_params,
            "convergence_bound: P_O must lie in [0, 1)");
  }
};

struct ConvergenceBound {
  double mu_j1 = 0, mu_j2 = 0, mu_j3 = 0;
  double e_j1_sq = 0, e_j3_sq = 0;
  double sigma_j1 = 0, sigma_j2 = 0;  // standard deviations
  double term_ratio = 0;              // mu_j2 / mu_j1
  double term_var_j2 = 0;             // sigma_j2^2 / (mu_j1^2 T)
  double term_var_j1 = 0;             // mu_j2^2 sigma_j1^2 / (mu_j1^4 T)
  double term_cross = 0;              // 2 mu_j2 sigma_j1 sigma_j2 / (mu_j1^3 T)
  double epsilon = 0;
};

// Bound on the minimum expected gradient norm for binary-recovery training
// with geometric retry counts, at the implied step size (1/L)sqrt(M/T).
inline ConvergenceBound convergence_bound(const ConvergenceBoundParams& params) {
  params.validate();
  const double z = params.outage_overall;
  const double e1 = retry_moment(1, z), e2 = retry_moment(2, z), e3 = retry_moment(3, z),
               e4 = retry_moment(4, z);
  const double t = static_cast<double>(params.rounds);
  const double steps = static_cast<double>(params.local_steps);
  const double q = std::sqrt(static_cast<double>(params.num_clients) / t);
  const double var = params.data_variance;
  const double het_sum = (params.outage_up.array() * params.heterogeneity.array()).sum();
  const double up_sq_sum = params.outage_up.array().square().sum();

  ConvergenceBound out;
  out.mu_j1 = 0.5 * e1 - 2.0 * steps * q * e2;
  out.e_j1_sq = 0.25 * e2 - 2.0 * steps * q * e3 + 4.0 * steps * steps * q * q * e4;
  out.sigma_j1 = std::sqrt(std::max(0.0, out.e_j1_sq - out.mu_j1 * out.mu_j1));

  out.mu_j3 = 0.5 * var * q * up_sq_sum * e1 + 2.0 * steps * q * het_sum * e2;
  out.e_j3_sq = 0.25 * var * var * q * q * up_sq_sum * up_sq_sum * e2 +
                2.0 * steps * var * q * q * up_sq_sum * het_sum * e3 +
                4.0 * steps * steps * q * q * het_sum * het_sum * e4;
  out.sigma_j2 = std::sqrt(std::max(0.0, out.e_j3_sq - out.mu_j3 * out.mu_j3));

  out.mu_j2 =
      params.smoothness / (t * steps) * std::sqrt(t / params.num_clients) * params.objective_gap +
      out.mu_j3;

  require(out.mu_j1 > 0.0, ErrorCode::bound_inapplicable,
          "convergence_bound: mu_j1 <= 0; T too small for the approximation regime");

  out.term_ratio = out.mu_j2 / out.mu_j1;
  out.term_var_j2 = out.sigma_j2 * out.sigma_j2 / (out.mu_j1 * out.mu_j1 * t);
  out.term_var_j1 = out.mu_j2 * out.mu_j2 * out.sigma_j1 * out.sigma_j1 /
                    (out.mu_j1 * out.mu_j1 * out.mu_j1 * out.mu_j1 * t);
  out.term_cross =
      2.0 * out.mu_j2 * out.sigma_j1 * out.sigma_j2 / (out.mu_j1 * out.mu_j1 * out.mu_j1 * t);
  out.epsilon = out.term_ratio + 3.0 * (out.term_var_j2 + out.term_var_j1 + out.term_cross);
  return out;
}

struct PartialAveragingBoundParams {
  int rounds = 0;       // T
  int local_steps = 0;  // I
  double k_star = 0;
  double smoothness = 0;
  double objective_gap = 0;
  double grad_sq_mean = 0;  // per-round average of the mean squared local gradient norm
  double data_variance = 0;
  double batch_size = 1;
  double heterogeneity_mean = 0;  // (1/M) sum of the per-client bounds
};

struct PartialAveragingBound {
  double term_init = 0, term_drift = 0, term_variance = 0, term_hetero = 0, total = 0;
};

// Formula evaluator for the stacked-decoder training bound at the coupled
// step size K*/sqrt(8LTI). Evaluated numerically only; nothing here ties the
// constants to observed traces.
inline PartialAveragingBound gc_plus_convergence_bound(const PartialAveragingBoundParams& p) {
  require(p.rounds >= 1 && p.local_steps >= 1, ErrorCode::invalid_params,
          "gc_plus_convergence_bound: T and I must be positive");
  require(p.k_star > 0.0 && p.smoothness > 0.0 && p.batch_size > 0.0, ErrorCode::invalid_params,
          "gc_plus_convergence_bound: K*, L, b must be positive");
  const double t = static_cast<double>(p.rounds);
  const double steps = static_cast<double>(p.local_steps);
  const double tik = t * steps * p.k_star;
  const double ti = t * steps;

  PartialAveragingBound out;
  out.term_init = 496.0 * p.smoothness / (11.0 * std::sqrt(tik)) * p.objective_gap;
  out.term_drift = 31.0 / (88.0 * std::pow(ti, 1.5) * std::sqrt(p.k_star)) * t * p.grad_sq_mean;
  out.term_variance = (39.0 / (88.0 * std::sqrt(tik)) + 1.0 / (88.0 * std::pow(tik, 0.75))) *
                      p.data_variance / p.batch_size;
  out.term_hetero = (4.0 / (11.0 * std::sqrt(tik)) + 1.0 / (22.0 * std::pow(tik, 0.75)) +
                     31.0 / (22.0 * std::pow(ti, 0.25) * std::pow(p.k_star, 1.25))) *
                    p.heterogeneity_mean;
  out.total = out.term_init + out.term_drift + out.term_variance + out.term_hetero;
  return out;
}

// Information leaked (in bits) about one client's update by a complete
// partial sum of independent Gaussian updates with the given covariances.
inline double lmip_bits(const Vector& weights, const std::vector<Matrix>& covariances, int client,
                        int dim) {
  const auto m_count = weights.size();
  require(static_cast<Eigen::Index>(covariances.size()) == m_count, ErrorCode::invalid_input,
          "lmip_bits: one covariance per client required");
  require(client >= 0 && client < m_count, ErrorCode::invalid_input,
          "lmip_bits: client out of range");
  require(dim >= 1, ErrorCode::invalid_input, "lmip_bits: dimension must be positive");
  for (const auto& cov : covariances)
    require(cov.rows() == dim && cov.cols() == dim, ErrorCode::invalid_input,
            "lmip_bits: covariance shape mismatch");

  if (weights(client) == 0.0) return 0.0;

  Matrix with_all = Matrix::Zero(dim, dim);
  for (Eigen::Index k = 0; k < m_count; ++k)
    with_all += weights(k) * weights(k) * covariances[static_cast<std::size_t>(k)];
  const Matrix without =
      with_all - weights(client) * weights(client) * covariances[static_cast<std::size_t>(client)];

  const auto log_det = [](const Matrix& m) -> std::optional<double> {
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) return std::nullopt;
    double ld = 0.0;
    const Matrix l = llt.matrixL();
    for (Eigen::Index i = 0; i < l.rows(); ++i) {
      if (l(i, i) <= 0.0) return std::nullopt;
      ld += std::log(l(i, i));
    }
    return 2.0 * ld;
  };

  const auto ld_without = log_det(without);
  if (!ld_without)
    fail(ErrorCode::infinite_leakage, "lmip_bits: complement sum carries no noise");
  const auto ld_with = log_det(with_all);
  require(ld_with.has_value(), ErrorCode::invalid_input, "lmip_bits: degenerate total covariance");

  return 0.5 * static_cast<double>(dim) * (*ld_with - *ld_without) / std::log(2.0);
}

}  // namespace cogc
