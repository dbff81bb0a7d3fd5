#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "cogc/analysis.hpp"
#include "cogc/channel.hpp"
#include "cogc/code.hpp"
#include "cogc/errors.hpp"
#include "cogc/io.hpp"
#include "cogc/protocol.hpp"
#include "cogc/rng.hpp"
#include "cogc/training.hpp"

// Monte Carlo oracles that cross-validate the closed forms, plus the sweep
// runner that drives training comparisons and writes result files.

namespace cogc {

struct McReport {
  double estimate = 0.0;
  double std_error = 0.0;
  long trials = 0;
  std::optional<double> target;   // closed-form value when one applies
  std::optional<double> z_score;  // (estimate - target) / std_error
};

inline void attach_target(McReport& report, double target) {
  report.target = target;
  if (report.std_error > 0.0)
    report.z_score = (report.estimate - target) / report.std_error;
  else if (report.estimate == target)
    report.z_score = 0.0;
}

// Simulates full rounds through channel + protocol and counts standard-decode
// failures; the closed-form outage probability is attached as the target.
inline McReport mc_outage(const NetworkModel& net, int s, long trials, std::uint64_t seed) {
  require(trials >= 1, ErrorCode::invalid_input, "mc_outage: trials must be >= 1");
  net.validate();
  const int m_count = net.num_clients();
  const CyclicCode code = generate_code({m_count, s, rng::word(seed, rng::kTrial, 0, 0, 1)});
  const LocalUpdateSet updates = Matrix::Zero(m_count, 1);

  long failures = 0;
  for (long trial = 0; trial < trials; ++trial) {
    const RoundConnectivity conn = draw_round(net, {seed, static_cast<std::uint64_t>(trial), 0});
    const RoundTranscript transcript = gradient_share(code, conn, updates);
    if (gc_decode(code, transcript).kind == DecodeKind::kFailure) ++failures;
  }

  McReport report;
  report.trials = trials;
  report.estimate = static_cast<double>(failures) / static_cast<double>(trials);
  report.std_error =
      std::sqrt(report.estimate * (1.0 - report.estimate) / static_cast<double>(trials));
  attach_target(report, outage_probability(net, s).p_o);
  return report;
}

struct RecoveryProfile {
  long trials = 0;
  long full_via_gc = 0;
  long full_via_plus = 0;
  long failure = 0;
  std::vector<long> partial;  // index k = 1..M-1 -> count of |K4| = k

  // Value-correctness bookkeeping from the same trials.
  double max_recovered_rel_error = 0.0;
  double max_gc_mean_rel_error = 0.0;  // standard-decode sum vs true mean
  long aggregation_mismatches = 0;     // recomputed mean over K4 != reported update

  long full_recoveries() const { return full_via_gc + full_via_plus; }
  long partial_total() const {
    long total = 0;
    for (long c : partial) total += c;
    return total;
  }
  double full_rate() const {
    return static_cast<double>(full_recoveries()) / static_cast<double>(trials);
  }
  double full_rate_std_error() const {
    const double p = full_rate();
    return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
  }
};

// Histogram over stacked-decoder outcomes; every attempt uses a freshly drawn
// code unless reuse_code is set (degenerate study). Updates are random so the
// recovered values can be checked against ground truth trial by trial.
inline RecoveryProfile mc_recovery_profile(const NetworkModel& net, int s, int stack_attempts,
                                           long trials, std::uint64_t seed,
                                           DecodeMode mode = DecodeMode::kExact,
                                           bool reuse_code = false, int dim = 2,
                                           std::vector<io::json>* dump = nullptr,
                                           long dump_limit = 0) {
  require(trials >= 1, ErrorCode::invalid_input, "mc_recovery_profile: trials must be >= 1");
  require(stack_attempts >= 1, ErrorCode::invalid_input, "mc_recovery_profile: t_r must be >= 1");
  net.validate();
  const int m_count = net.num_clients();

  RecoveryProfile profile;
  profile.trials = trials;
  profile.partial.assign(static_cast<std::size_t>(m_count), 0);

  const CyclicCode shared = generate_code({m_count, s, rng::word(seed, rng::kTrial, 0, 0, 2)});

  for (long trial = 0; trial < trials; ++trial) {
    Matrix updates(m_count, dim);
    for (int m = 0; m < m_count; ++m)
      for (int j = 0; j < dim; ++j)
        updates(m, j) = rng::normal_at(seed, rng::kTrial, static_cast<std::uint64_t>(trial),
                                       static_cast<std::uint64_t>(m * dim + j));

    std::vector<AttemptRecord> attempts;
    attempts.reserve(static_cast<std::size_t>(stack_attempts));
    for (int i = 0; i < stack_attempts; ++i) {
      const CyclicCode code =
          reuse_code ? shared
                     : generate_code({m_count, s,
                                      rng::word(seed, rng::kTrial,
                                                static_cast<std::uint64_t>(trial),
                                                static_cast<std::uint64_t>(i), 3)});
      const RoundConnectivity conn =
          draw_round(net, {seed, static_cast<std::uint64_t>(trial),
                           static_cast<std::uint64_t>(i)});
      attempts.push_back({code, gradient_share(code, conn, updates)});
    }
    const StackedTranscript stacked = stack_transcripts(std::move(attempts));
    const DecodeOutcome outcome = gc_plus_decode(stacked, mode);

    switch (outcome.kind) {
      case DecodeKind::kFullViaGc: ++profile.full_via_gc; break;
      case DecodeKind::kFullViaPlus: ++profile.full_via_plus; break;
      case DecodeKind::kFailure: ++profile.failure; break;
      case DecodeKind::kPartial:
        ++profile.partial[outcome.decoded.size()];
        break;
    }

    if (outcome.kind == DecodeKind::kPartial || outcome.kind == DecodeKind::kFullViaPlus) {
      Vector mean = Vector::Zero(dim);
      for (int m : outcome.decoded) {
        const Vector& recovered = outcome.recovered.at(m);
        const Vector truth = updates.row(m).transpose();
        const double rel =
            (recovered - truth).norm() / std::max(1.0, truth.norm());
        profile.max_recovered_rel_error = std::max(profile.max_recovered_rel_error, rel);
        mean += recovered;
      }
      mean /= static_cast<double>(outcome.decoded.size());
      if (!(mean.array() == outcome.global_update->array()).all())
        ++profile.aggregation_mismatches;
    } else if (outcome.kind == DecodeKind::kFullViaGc) {
      const Vector truth = updates.colwise().mean().transpose();
      const double rel =
          (*outcome.global_update - truth).norm() / std::max(1.0, truth.norm());
      profile.max_gc_mean_rel_error = std::max(profile.max_gc_mean_rel_error, rel);
    }

    if (dump && trial < dump_limit) {
      io::json trial_dump = io::json::array();
      for (std::size_t i = 0; i < stacked.attempts.size(); ++i)
        trial_dump.push_back(io::transcript_to_json(
            static_cast<int>(i), stacked.attempts[i].transcript, &outcome));
      dump->push_back(std::move(trial_dump));
    }
  }
  return profile;
}

// Conditional mean of 1/|K4| over non-failure stacked decodes. For a
// homogeneous network (p_c2c = p_up = p) the closed-form upper bound 1/K* is
// attached as the target.
inline McReport mc_kbar(const NetworkModel& net, int s, int stack_attempts, long trials,
                        std::uint64_t seed, DecodeMode mode = DecodeMode::kExact) {
  require(trials >= 1, ErrorCode::invalid_input, "mc_kbar: trials must be >= 1");
  net.validate();
  const int m_count = net.num_clients();

  double sum = 0.0, sum_sq = 0.0;
  long samples = 0;
  for (long trial = 0; trial < trials; ++trial) {
    Matrix updates = Matrix::Zero(m_count, 1);
    std::vector<AttemptRecord> attempts;
    for (int i = 0; i < stack_attempts; ++i) {
      const CyclicCode code = generate_code(
          {m_count, s,
           rng::word(seed, rng::kTrial, static_cast<std::uint64_t>(trial),
                     static_cast<std::uint64_t>(i), 4)});
      const RoundConnectivity conn = draw_round(
          net, {seed, static_cast<std::uint64_t>(trial), static_cast<std::uint64_t>(i)});
      attempts.push_back({code, gradient_share(code, conn, updates)});
    }
    const DecodeOutcome outcome = gc_plus_decode(stack_transcripts(std::move(attempts)), mode);
    if (outcome.kind == DecodeKind::kFailure) continue;
    const double inv = 1.0 / static_cast<double>(outcome.decoded.size());
    sum += inv;
    sum_sq += inv * inv;
    ++samples;
  }
  require(samples > 0, ErrorCode::no_sample, "mc_kbar: every trial failed to decode");

  McReport report;
  report.trials = samples;
  report.estimate = sum / static_cast<double>(samples);
  const double var =
      std::max(0.0, sum_sq / static_cast<double>(samples) - report.estimate * report.estimate);
  report.std_error = std::sqrt(var / static_cast<double>(samples));

  const double p = net.outage_up(0);
  bool homogeneous = (net.outage_up.array() == p).all();
  for (int m = 0; m < m_count && homogeneous; ++m)
    for (int k = 0; k < m_count; ++k)
      if (m != k && net.outage_c2c(m, k) != p) { homogeneous = false; break; }
  if (homogeneous) {
    const double p_o = outage_probability(net, s).p_o;
    attach_target(report, 1.0 / k_star(m_count, s, stack_attempts, p, p_o));
  }
  return report;
}

// Geometric retry sampler; cross-checks the expected-retries closed form.
inline McReport mc_geometric_retries(double p_o, long trials, std::uint64_t seed) {
  require(trials >= 1, ErrorCode::invalid_input, "mc_geometric_retries: trials must be >= 1");
  require(p_o >= 0.0 && p_o < 1.0, ErrorCode::invalid_input,
          "mc_geometric_retries: P_O must lie in [0, 1)");
  double sum = 0.0, sum_sq = 0.0;
  for (long trial = 0; trial < trials; ++trial) {
    long r = 1;
    while (rng::uniform(seed, rng::kTrial, static_cast<std::uint64_t>(trial), 5,
                        static_cast<std::uint64_t>(r)) < p_o)
      ++r;
    sum += static_cast<double>(r);
    sum_sq += static_cast<double>(r) * static_cast<double>(r);
  }
  McReport report;
  report.trials = trials;
  report.estimate = sum / static_cast<double>(trials);
  const double var =
      std::max(0.0, sum_sq / static_cast<double>(trials) - report.estimate * report.estimate);
  report.std_error = std::sqrt(var / static_cast<double>(trials));
  attach_target(report, expected_retries(p_o));
  return report;
}

// ---- experiment suite ------------------------------------------------------
//
// Config schema:
// {
//   "seed": 1,
//   "sweeps": [
//     { "name": "quad", "strategies": ["ideal", "cogc_d1"], "seeds": [1, 2],
//       "network": {"M": 10, "p_c2c": 0.1, "p_up": 0.1},
//       "train": {"M": 10, "s": 7, "T": 50, "I": 1, "eta": 0.1, "t_r": 2,
//                  "family": "quadratic", "dim": 4, "skew": 1.0} }
//   ]
// }

struct SuiteResult {
  std::vector<std::string> trace_files;
  std::string summary_file;
};

inline TrainConfig train_config_from_json(const io::json& j) {
  TrainConfig config;
  config.num_clients = j.at("M").get<int>();
  config.local_steps = j.value("I", 1);
  config.rounds = j.at("T").get<int>();
  config.learning_rate = j.at("eta").get<double>();
  config.stack_attempts = j.value("t_r", 2);
  config.straggler_tolerance = j.value("s", 0);
  config.batch_size = j.value("batch", 0);
  config.retry_cap = j.value("retry_cap", 10000L);
  config.plus_mode =
      j.value("plus_mode", std::string("exact")) == "exact" ? DecodeMode::kExact
                                                            : DecodeMode::kPaperApprox;
  config.data.family = family_from_string(j.value("family", std::string("quadratic")));
  config.data.dim = j.value("dim", 4);
  config.data.classes = j.value("classes", 4);
  config.data.samples_per_client = j.value("samples_per_client", 64);
  config.data.skew = j.value("skew", 1.0);
  if (j.contains("strategy")) config.strategy = strategy_from_string(j.at("strategy"));
  if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
  return config;
}

inline SuiteResult run_experiment_suite(const io::json& config, const std::string& output_dir) {
  SuiteResult result;
  io::json summary;
  summary["config_hash"] = io::hash_hex(config.dump());
  summary["runs"] = io::json::array();

  for (const auto& sweep : config.value("sweeps", io::json::array())) {
    const std::string name = sweep.at("name").get<std::string>();
    const NetworkModel net = io::network_from_json(sweep.at("network"));
    for (const auto& strategy_name : sweep.at("strategies")) {
      for (const auto& seed_value : sweep.at("seeds")) {
        TrainConfig train_config = train_config_from_json(sweep.at("train"));
        train_config.strategy = strategy_from_string(strategy_name.get<std::string>());
        train_config.seed = seed_value.get<std::uint64_t>();

        const TrainingTrace trace = train(train_config, net);

        const std::string stem = name + "__" + to_string(train_config.strategy) + "__seed" +
                                 std::to_string(train_config.seed);
        const std::string trace_path = output_dir + "/" + stem + ".csv";
        io::write_text_file(trace_path, io::trace_to_csv(trace, train_config.strategy));
        io::write_text_file(output_dir + "/" + stem + ".config.json",
                            io::train_config_to_json(train_config).dump(2) + "\n");
        result.trace_files.push_back(trace_path);

        io::json run{{"sweep", name},
                     {"strategy", to_string(train_config.strategy)},
                     {"seed", train_config.seed},
                     {"final_loss", trace.final_eval.loss},
                     {"final_grad_norm", trace.final_eval.grad_norm},
                     {"total_transmissions", trace.total_transmissions},
                     {"total_attempts", trace.total_attempts},
                     {"rounds", trace.rounds.size()},
                     {"trace", stem + ".csv"}};
        if (trace.final_eval.accuracy) run["final_accuracy"] = *trace.final_eval.accuracy;
        summary["runs"].push_back(std::move(run));
      }
    }
  }

  result.summary_file = output_dir + "/summary.json";
  io::write_text_file(result.summary_file, summary.dump(2) + "\n");
  return result;
}

}  // namespace cogc
