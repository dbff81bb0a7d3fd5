// Acceptance gate: every release-blocking check as one pass/fail line.
// Run all: cogc_acceptance        Run selected: cogc_acceptance 3 7 9

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cogc/experiments.hpp"
#include "cogc/io.hpp"
#include "support/oracles.hpp"

using namespace cogc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

NetworkModel het_net(int m_count, std::uint64_t variant) {
  NetworkModel net;
  net.outage_c2c = Matrix::Zero(m_count, m_count);
  net.outage_up = Vector::Zero(m_count);
  for (int m = 0; m < m_count; ++m) {
    for (int k = 0; k < m_count; ++k)
      if (m != k)
        net.outage_c2c(m, k) =
            0.05 +
            0.55 * ((static_cast<std::uint64_t>(m * m_count + k) * 2654435761u + variant) % 97) /
                96.0;
    net.outage_up(m) =
        0.05 + 0.6 * ((static_cast<std::uint64_t>(m) * 40503u + 11u * variant) % 89) / 88.0;
  }
  net.validate();
  return net;
}

// 1. Heavy-sharing-loss case study: the probability that every client holds
//    an incomplete sum at p_c2c = 0.4, M = 10, s = 7 prints as 0.7528.
Outcome c1() {
  const auto start = std::chrono::steady_clock::now();
  const auto b = outage_probability(NetworkModel::uniform(10, 0.4, 0.0), 7);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double err = std::abs(b.prod_p11 - 0.7528);
  return {err <= 5e-5 && elapsed < 1.0,
          "prod_P11=" + fmt(b.prod_p11) + " |err|=" + fmt(err) + " time=" + fmt(elapsed) + "s"};
}

// 2. Closed-form outage equals exhaustive enumeration on 20 small networks.
Outcome c2() {
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::pair<NetworkModel, int>> configs;
  for (int s : {0, 1}) configs.emplace_back(NetworkModel::uniform(2, 0.3, 0.25), s);
  for (int s : {0, 1, 2}) configs.emplace_back(NetworkModel::uniform(3, 0.3, 0.25), s);
  for (int s : {1, 2, 3}) configs.emplace_back(NetworkModel::uniform(4, 0.3, 0.25), s);
  for (int s : {1, 2, 4}) configs.emplace_back(NetworkModel::uniform(5, 0.35, 0.2), s);
  for (int s : {2, 3, 5}) configs.emplace_back(NetworkModel::uniform(6, 0.25, 0.3), s);
  configs.emplace_back(het_net(3, 1), 1);
  configs.emplace_back(het_net(4, 2), 2);
  configs.emplace_back(het_net(5, 3), 2);
  configs.emplace_back(het_net(5, 4), 3);
  configs.emplace_back(het_net(6, 5), 2);
  configs.emplace_back(het_net(6, 6), 4);

  double worst = 0.0;
  for (const auto& [net, s] : configs) {
    const double closed = outage_probability(net, s).p_o;
    const double oracle = oracles::enumerate_outage(net, s);
    worst = std::max(worst, std::abs(closed - oracle));
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {worst <= 1e-12 && elapsed < 30.0,
          "configs=" + std::to_string(configs.size()) + " worst|closed-oracle|=" + fmt(worst) +
              " time=" + fmt(elapsed) + "s"};
}

// 3. Monte Carlo agreement at 1e5 trials on 10 networks up to M = 12.
Outcome c3() {
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::pair<NetworkModel, int>> configs;
  configs.emplace_back(NetworkModel::uniform(3, 0.0, 0.5), 1);
  configs.emplace_back(NetworkModel::uniform(4, 0.3, 0.3), 2);
  configs.emplace_back(NetworkModel::uniform(6, 0.2, 0.4), 2);
  configs.emplace_back(NetworkModel::uniform(8, 0.25, 0.2), 4);
  configs.emplace_back(NetworkModel::uniform(10, 0.4, 0.0), 7);
  configs.emplace_back(NetworkModel::uniform(12, 0.15, 0.25), 6);
  configs.emplace_back(het_net(5, 21), 2);
  configs.emplace_back(het_net(8, 22), 3);
  configs.emplace_back(het_net(10, 23), 5);
  configs.emplace_back(het_net(12, 24), 7);

  double worst_z = 0.0;
  std::uint64_t seed = 1000;
  for (const auto& [net, s] : configs) {
    const McReport report = mc_outage(net, s, 100000, seed++);
    if (report.z_score) worst_z = std::max(worst_z, std::abs(*report.z_score));
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {worst_z <= 4.0 && elapsed < 120.0,
          "configs=10 trials=1e5 worst|z|=" + fmt(worst_z) + " time=" + fmt(elapsed) + "s"};
}

// 4. Code algebra over 1000 seeds: rank, parity residual, support shape and
//    combination rows for every straggler pattern (exhaustive up to M = 8).
Outcome c4() {
  long built = 0;
  double worst_parity = 0.0, worst_comb = 0.0;
  long rank_errors = 0, support_errors = 0;
  std::uint64_t seed = 0;
  while (built < 1000) {
    for (int m_count = 3; m_count <= 12 && built < 1000; ++m_count)
      for (int s = 1; s <= m_count - 2 && built < 1000; ++s, ++built) {
        const CyclicCode code = generate_code({m_count, s, seed++});
        worst_parity = std::max(
            worst_parity, (code.parity * code.coeffs.transpose()).cwiseAbs().maxCoeff());
        if (numerical_rank(code.coeffs) != m_count - s) ++rank_errors;
        for (int row = 0; row < m_count; ++row) {
          int nonzeros = 0;
          for (int col = 0; col < m_count; ++col) {
            if (code.coeffs(row, col) != 0.0) ++nonzeros;
            if (!code.in_support(row, col) && code.coeffs(row, col) != 0.0) ++support_errors;
          }
          if (nonzeros != s + 1) ++support_errors;
        }

        const auto residual = [&](const std::vector<int>& pattern) {
          const CombinationRow row = combination_vector(code, pattern);
          return (row.weights.transpose() * code.coeffs -
                  Eigen::RowVectorXd::Ones(m_count))
              .cwiseAbs()
              .maxCoeff();
        };
        if (m_count <= 8) {
          // every subset of size <= s
          std::vector<int> pattern;
          const std::function<void(int)> walk = [&](int next) {
            worst_comb = std::max(worst_comb, residual(pattern));
            if (static_cast<int>(pattern.size()) == s) return;
            for (int m = next; m < m_count; ++m) {
              pattern.push_back(m);
              walk(m + 1);
              pattern.pop_back();
            }
          };
          walk(0);
        } else {
          for (int draw = 0; draw < 100; ++draw) {
            rng::Sequence seq(9000 + seed, rng::kMask, static_cast<std::uint64_t>(draw));
            const int size = static_cast<int>(seq.below(static_cast<std::uint64_t>(s) + 1));
            std::set<int> pattern;
            while (static_cast<int>(pattern.size()) < size)
              pattern.insert(static_cast<int>(seq.below(static_cast<std::uint64_t>(m_count))));
            worst_comb = std::max(
                worst_comb, residual(std::vector<int>(pattern.begin(), pattern.end())));
          }
        }
      }
  }
  const bool pass = worst_parity <= 1e-9 && worst_comb <= 1e-8 && rank_errors == 0 &&
                    support_errors == 0;
  return {pass, "codes=1000 worst|HB'|=" + fmt(worst_parity) + " worst_comb=" + fmt(worst_comb) +
                    " rank_errors=" + std::to_string(rank_errors) +
                    " support_errors=" + std::to_string(support_errors)};
}

// 5. Masked-rank law over 1e4 random unit-diagonal masks per config: the rank
//    never drops below M-s, and whenever at least M-s rows are unperturbed it
//    must equal min{M, M-s+n} with n the nonconflicting-erasure count.
Outcome c5() {
  std::ostringstream detail;
  bool pass = true;
  for (int s : {3, 7}) {
    long eligible = 0, mismatches = 0, bound_violations = 0;
    std::string example;
    for (int trial = 0; trial < 10000; ++trial) {
      const double p_erase =
          0.05 + 0.6 * rng::uniform(501, rng::kMask, static_cast<std::uint64_t>(s),
                                    static_cast<std::uint64_t>(trial), 0);
      const CyclicCode code = generate_code(
          {10, s, rng::word(502, 7, static_cast<std::uint64_t>(s),
                            static_cast<std::uint64_t>(trial))});
      IntMatrix mask = IntMatrix::Ones(10, 10);
      for (int m = 0; m < 10; ++m)
        for (int k = 0; k < 10; ++k)
          if (m != k && rng::uniform(503, rng::kMask, static_cast<std::uint64_t>(s),
                                     static_cast<std::uint64_t>(trial),
                                     static_cast<std::uint64_t>(m * 10 + k)) < p_erase)
            mask(m, k) = 0;
      const RankReport report = rank_after_client_outages(code, mask);
      if (report.numerical_rank < 10 - s) ++bound_violations;
      if (report.predicted_rank) {
        ++eligible;
        if (*report.predicted_rank != report.numerical_rank) {
          ++mismatches;
          if (example.empty())
            example = " first@trial=" + std::to_string(trial) +
                      " rank=" + std::to_string(report.numerical_rank) +
                      " predicted=" + std::to_string(*report.predicted_rank);
        }
      }
    }
    if (bound_violations != 0 || mismatches != 0) pass = false;
    detail << "s=" << s << ": bound_violations=" << bound_violations
           << " eligible=" << eligible << " prediction_mismatches=" << mismatches << example
           << "  ";
  }
  return {pass, detail.str()};
}

// 6. Stacked independent codes hit min{(M-s-1)t+1, M} for every t and seed.
Outcome c6() {
  long checks = 0, errors = 0;
  bool spot = false;
  for (const auto& [m_count, s] :
       std::vector<std::pair<int, int>>{{10, 7}, {8, 5}, {6, 3}}) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      Matrix stacked(0, m_count);
      for (int t = 1; t <= 6; ++t) {
        const CyclicCode code = generate_code(
            {m_count, s,
             rng::word(601, static_cast<std::uint64_t>(m_count), seed,
                       static_cast<std::uint64_t>(t))});
        Matrix next(stacked.rows() + m_count, m_count);
        next << stacked, code.coeffs;
        stacked = next;
        ++checks;
        const int observed = numerical_rank(stacked);
        if (observed != predicted_stack_rank(m_count, s, t)) ++errors;
        if (m_count == 10 && t == 2 && observed == 5) spot = true;
      }
    }
  }
  return {errors == 0 && spot,
          "checks=" + std::to_string(checks) + " errors=" + std::to_string(errors) +
              " (10,7,t=2)->5 seen=" + (spot ? "yes" : "no")};
}

// 7. Stacked-decoder bounds at M=10, s=7, t=4, p=0.5 over 1e5 trials.
Outcome c7() {
  const NetworkModel net = NetworkModel::uniform(10, 0.5, 0.5);
  const RecoveryProfile profile = mc_recovery_profile(net, 7, 4, 100000, 700);
  const double lower = full_recovery_lower_bound(10, 7, 4, 0.5);
  const bool full_ok = profile.full_rate() >= lower - 4.0 * profile.full_rate_std_error();

  const McReport kbar = mc_kbar(net, 7, 4, 100000, 701);
  const double p_o = outage_probability(net, 7).p_o;
  const double inv_k_star = 1.0 / k_star(10, 7, 4, 0.5, p_o);
  const bool kbar_ok = kbar.estimate <= inv_k_star + 4.0 * kbar.std_error;

  return {full_ok && kbar_ok,
          "full_rate=" + fmt(profile.full_rate()) + " >= bound=" + fmt(lower) +
              "-4se; E[1/|K4|]=" + fmt(kbar.estimate) + " <= 1/K*=" + fmt(inv_k_star) + "+4se"};
}

// 8. Outcome histogram at p_up=0.4, p_c2c=0.25, t=2: full recovery is modal.
Outcome c8() {
  const RecoveryProfile profile =
      mc_recovery_profile(NetworkModel::uniform(10, 0.25, 0.4), 7, 2, 10000, 800);
  const long full = profile.full_recoveries();
  const bool pass = full > profile.partial_total() && full > profile.failure;
  return {pass, "full=" + std::to_string(full) +
                    " partial=" + std::to_string(profile.partial_total()) +
                    " failure=" + std::to_string(profile.failure)};
}

// 9. Exact-decode value correctness across the criterion-7 trials.
Outcome c9() {
  const NetworkModel net = NetworkModel::uniform(10, 0.5, 0.5);
  const RecoveryProfile profile = mc_recovery_profile(net, 7, 4, 100000, 700);
  const bool pass = profile.max_recovered_rel_error <= 1e-7 &&
                    profile.aggregation_mismatches == 0 &&
                    profile.max_gc_mean_rel_error <= 1e-8;
  return {pass, "max_rel_err=" + fmt(profile.max_recovered_rel_error) +
                    " aggregation_mismatches=" + std::to_string(profile.aggregation_mismatches) +
                    " gc_mean_err=" + fmt(profile.max_gc_mean_rel_error)};
}

// 10. Desk-scale training battery on the quadratic family.
Outcome c10() {
  DataSpec quad;
  quad.family = ModelFamily::kQuadratic;
  quad.dim = 4;
  quad.skew = 1.0;

  TrainConfig config;
  config.num_clients = 10;
  config.local_steps = 1;
  config.rounds = 200;
  config.learning_rate = 0.1;
  config.straggler_tolerance = 7;
  config.data = quad;
  config.seed = 33;

  config.strategy = Strategy::kIdealFl;
  const TrainingTrace ideal = train(config, NetworkModel::uniform(10, 0.0, 0.0));

  config.strategy = Strategy::kCogcDesign1;
  const TrainingTrace coded = train(config, NetworkModel::uniform(10, 0.1, 0.1));

  const ErmProblem problem = ErmProblem::generate(10, quad, config.seed);
  const Vector optimum = *problem.analytic_optimum();
  const double coded_dist = (coded.final_params - optimum).norm();
  const bool optimal = coded.final_eval.grad_norm <= 1e-6 && coded_dist <= 1e-6 &&
                       (coded.final_params - ideal.final_params).cwiseAbs().maxCoeff() <= 1e-9;

  NetworkModel skewed = NetworkModel::uniform(10, 0.0, 0.0);
  skewed.outage_up(0) = 0.9;
  config.strategy = Strategy::kIntermittentFl;
  config.rounds = 2000;
  config.learning_rate = 0.05;
  const TrainingTrace drifted = train(config, skewed);
  const double drift_dist = (drifted.final_params - optimum).norm();
  const bool biased = drift_dist > 10.0 * std::max(coded_dist, 1e-12);

  bool plus_beats_skip = true;
  std::string tail;
  const NetworkModel poor = NetworkModel::uniform(10, 0.5, 0.4);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    TrainConfig duel = config;
    duel.rounds = 60;
    duel.learning_rate = 0.1;
    duel.seed = seed;
    duel.stack_attempts = 2;
    duel.strategy = Strategy::kGcPlus;
    const double plus_loss = train(duel, poor).final_eval.loss;
    duel.strategy = Strategy::kCogcDesign2;
    const double skip_loss = train(duel, poor).final_eval.loss;
    if (plus_loss > skip_loss) plus_beats_skip = false;
    tail += " " + fmt(plus_loss) + "<=" + fmt(skip_loss);
  }

  return {optimal && biased && plus_beats_skip,
          "coded_dist=" + fmt(coded_dist) + " grad=" + fmt(coded.final_eval.grad_norm) +
              " drift_dist=" + fmt(drift_dist) + " plus-vs-skip:" + tail};
}

// 11. Geometric retry law: sampled mean at P_O=0.5 and the exact value at 0.9.
Outcome c11() {
  const McReport coin = mc_geometric_retries(0.5, 100000, 1100);
  const bool mean_ok = std::abs(coin.estimate - 2.0) <= 3.0 * coin.std_error;
  const bool exact_ok = std::abs(expected_retries(0.9) - 10.0) <= 1e-9;
  return {mean_ok && exact_ok, "mean=" + fmt(coin.estimate) + " (3se=" +
                                   fmt(3.0 * coin.std_error) + "); retries(0.9)=" +
                                   fmt(expected_retries(0.9))};
}

// 12. Convergence-bound evaluator: small-outage limit and 1/T scaling.
Outcome c12() {
  ConvergenceBoundParams params;
  params.num_clients = 10;
  params.local_steps = 5;
  params.rounds = 16000;
  params.smoothness = 1.0;
  params.data_variance = 1.0;
  params.heterogeneity = Vector::Constant(10, 0.4);
  params.outage_up = Vector::Constant(10, 0.3);
  params.objective_gap = 2.0;

  params.outage_overall = 1e-8;
  const ConvergenceBound tiny = convergence_bound(params);
  const double limit =
      0.5 - 2.0 * params.local_steps * std::sqrt(10.0 / params.rounds);
  const bool limit_ok = std::abs(tiny.mu_j1 - limit) <= 1e-6;

  params.outage_overall = 0.3;
  const ConvergenceBound base = convergence_bound(params);
  const bool finite_ok = std::isfinite(base.epsilon) && std::isfinite(base.term_var_j2) &&
                         std::isfinite(base.term_var_j1) && std::isfinite(base.term_cross);
  params.rounds *= 2;
  const ConvergenceBound doubled = convergence_bound(params);
  const bool scaling_ok = doubled.term_var_j2 <= 0.5 * base.term_var_j2 + 1e-15 &&
                          doubled.term_var_j1 <= 0.5 * base.term_var_j1 + 1e-15 &&
                          doubled.term_cross <= 0.5 * base.term_cross + 1e-15;
  return {limit_ok && finite_ok && scaling_ok,
          "mu_J1=" + fmt(tiny.mu_j1) + " limit=" + fmt(limit) + " eps=" + fmt(base.epsilon) +
              " halving=" + (scaling_ok ? "yes" : "no")};
}

// 13. Leakage formula: absent client, the half-bit case, scale invariance.
Outcome c13() {
  Vector absent(3);
  absent << 0.0, 1.0, 2.0;
  std::vector<Matrix> unit3{Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                            Matrix::Identity(2, 2)};
  const double zero_bits = lmip_bits(absent, unit3, 0, 2);

  Vector pair(2);
  pair << 1.0, 1.0;
  std::vector<Matrix> unit2{Matrix::Identity(1, 1), Matrix::Identity(1, 1)};
  const double half = lmip_bits(pair, unit2, 0, 1);

  Vector w(3);
  w << 0.7, -1.3, 0.4;
  std::vector<Matrix> base{1.5 * Matrix::Identity(2, 2), 0.8 * Matrix::Identity(2, 2),
                           2.2 * Matrix::Identity(2, 2)};
  std::vector<Matrix> scaled;
  for (const auto& c : base) scaled.push_back(41.5 * c);
  const double drift = std::abs(lmip_bits(w, base, 1, 2) - lmip_bits(w, scaled, 1, 2));

  const bool pass =
      zero_bits == 0.0 && std::abs(half - 0.5) <= 1e-12 && drift <= 1e-12;
  return {pass, "absent=" + fmt(zero_bits) + " half_bit=" + fmt(half) +
                    " scale_drift=" + fmt(drift)};
}

// 14. Cost-efficient design at p = 0.1, target 0.5, with sM + |K3| accounting.
Outcome c14() {
  const NetworkModel net = NetworkModel::uniform(10, 0.1, 0.1);
  const int best = cost_efficient_s(net, 0.5);
  const double p_best = outage_probability(net, best).p_o;
  bool minimal = p_best <= 0.5;
  for (int s = 0; s < best; ++s)
    if (outage_probability(net, s).p_o <= 0.5) minimal = false;

  const long tx_max = transmissions_per_round(10, best, 10);
  bool accounting = tx_max == static_cast<long>(best + 1) * 10;
  // a drawn round pays s*M plus one uplink per complete sum
  const CyclicCode code = generate_code({10, best, 77});
  const RoundConnectivity conn = draw_round(net, {1400, 0, 0});
  const RoundTranscript t = gradient_share(code, conn, Matrix::Zero(10, 1));
  const long tx_round =
      transmissions_per_round(10, best, static_cast<int>(t.complete_owners.size()));
  if (tx_round != 10L * best + static_cast<long>(t.complete_owners.size())) accounting = false;

  return {minimal && accounting, "s*=" + std::to_string(best) + " P_O(s*)=" + fmt(p_best) +
                                     " tx_max=" + std::to_string(tx_max) +
                                     " tx_round=" + std::to_string(tx_round)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "incomplete-sum product case study", c1},
      {2, "outage closed form vs enumeration", c2},
      {3, "outage Monte Carlo agreement", c3},
      {4, "code algebra across seeds", c4},
      {5, "masked-rank law", c5},
      {6, "stacked-code rank law", c6},
      {7, "stacked-decoder recovery bounds", c7},
      {8, "modal outcome under moderate loss", c8},
      {9, "exact-decode value correctness", c9},
      {10, "desk-scale training battery", c10},
      {11, "geometric retries", c11},
      {12, "convergence bound evaluator", c12},
      {13, "partial-sum leakage", c13},
      {14, "cost-efficient design", c14},
  };

  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& criterion : criteria) {
    if (!selected.empty() && !selected.count(criterion.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criterion.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[C%-2d] %s %-38s (%.2fs): %s\n", criterion.id,
                outcome.pass ? "PASS" : "FAIL", criterion.name, elapsed,
                outcome.detail.c_str());
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
  }
  return failures;
}
