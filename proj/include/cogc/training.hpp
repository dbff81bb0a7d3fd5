#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cogc/analysis.hpp"
#include "cogc/channel.hpp"
#include "cogc/code.hpp"
#include "cogc/errors.hpp"
#include "cogc/protocol.hpp"
#include "cogc/rng.hpp"

// Desk-scale empirical risk minimization harness: synthetic quadratic and
// softmax-regression objectives with controllable heterogeneity, local SGD,
// and the training strategies that differ only in how a round's updates
// travel through the unreliable network.

namespace cogc {

enum class Strategy { kIdealFl, kIntermittentFl, kCogcDesign1, kCogcDesign2, kGcPlus };

inline const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::kIdealFl: return "ideal";
    case Strategy::kIntermittentFl: return "intermittent";
    case Strategy::kCogcDesign1: return "cogc_d1";
    case Strategy::kCogcDesign2: return "cogc_d2";
    case Strategy::kGcPlus: return "gc_plus";
  }
  return "unknown";
}

inline Strategy strategy_from_string(const std::string& name) {
  if (name == "ideal") return Strategy::kIdealFl;
  if (name == "intermittent") return Strategy::kIntermittentFl;
  if (name == "cogc_d1") return Strategy::kCogcDesign1;
  if (name == "cogc_d2") return Strategy::kCogcDesign2;
  if (name == "gc_plus") return Strategy::kGcPlus;
  fail(ErrorCode::invalid_params, "unknown strategy: " + name);
}

enum class ModelFamily { kQuadratic, kSoftmax };

inline const char* to_string(ModelFamily f) {
  return f == ModelFamily::kQuadratic ? "quadratic" : "softmax";
}

inline ModelFamily family_from_string(const std::string& name) {
  if (name == "quadratic") return ModelFamily::kQuadratic;
  if (name == "softmax") return ModelFamily::kSoftmax;
  fail(ErrorCode::invalid_params, "unknown model family: " + name);
}

struct DataSpec {
  ModelFamily family = ModelFamily::kQuadratic;
  int dim = 4;                  // parameter dim (quadratic) or feature dim (softmax)
  int classes = 4;              // softmax only
  int samples_per_client = 64;  // softmax only
  double skew = 1.0;  // quadratic: center spread; softmax: Dirichlet concentration
};

struct ClientData {
  Vector center;     // quadratic
  Matrix features;   // softmax, one sample per row (without bias column)
  std::vector<int> labels;
};

class ErmProblem {
 public:
  // Heterogeneous synthetic data. Quadratic clients get centers skew * z_m
  // with z_m standard normal, so skew = 0 collapses every client onto the
  // same objective. Softmax clients draw label proportions from a symmetric
  // Dirichlet with concentration = skew; skew = 0 degenerates to one class
  // per client.
  static ErmProblem generate(int num_clients, const DataSpec& spec, std::uint64_t seed) {
    require(num_clients >= 1, ErrorCode::invalid_params, "data: at least one client");
    require(spec.dim >= 1, ErrorCode::invalid_params, "data: dimension must be positive");
    require(spec.skew >= 0.0, ErrorCode::invalid_params, "data: skew must be nonnegative");

    ErmProblem problem;
    problem.spec_ = spec;
    problem.clients_.resize(static_cast<std::size_t>(num_clients));

    if (spec.family == ModelFamily::kQuadratic) {
      for (int m = 0; m < num_clients; ++m) {
        rng::Sequence seq(seed, rng::kData, static_cast<std::uint64_t>(m));
        Vector center(spec.dim);
        for (int j = 0; j < spec.dim; ++j) center(j) = spec.skew * seq.normal();
        problem.clients_[static_cast<std::size_t>(m)].center = std::move(center);
      }
      return problem;
    }

    require(spec.classes >= 2, ErrorCode::invalid_params, "data: softmax needs >= 2 classes");
    require(spec.samples_per_client >= 1, ErrorCode::invalid_params,
            "data: softmax needs >= 1 sample per client");

    Matrix prototypes(spec.classes, spec.dim);
    for (int c = 0; c < spec.classes; ++c) {
      rng::Sequence seq(seed, rng::kData, 1000000 + static_cast<std::uint64_t>(c));
      for (int j = 0; j < spec.dim; ++j) prototypes(c, j) = 2.0 * seq.normal();
    }

    for (int m = 0; m < num_clients; ++m) {
      rng::Sequence seq(seed, rng::kData, 2000000 + static_cast<std::uint64_t>(m));
      Vector proportions(spec.classes);
      if (spec.skew == 0.0) {
        proportions.setZero();
        proportions(m % spec.classes) = 1.0;
      } else {
        for (int c = 0; c < spec.classes; ++c) proportions(c) = seq.gamma(spec.skew);
        proportions /= proportions.sum();
      }
      ClientData& data = problem.clients_[static_cast<std::size_t>(m)];
      data.features.resize(spec.samples_per_client, spec.dim);
      data.labels.resize(static_cast<std::size_t>(spec.samples_per_client));
      for (int i = 0; i < spec.samples_per_client; ++i) {
        const double u = seq.uniform();
        int label = 0;
        double acc = 0.0;
        for (int c = 0; c < spec.classes; ++c) {
          acc += proportions(c);
          if (u < acc) { label = c; break; }
          label = c;
        }
        data.labels[static_cast<std::size_t>(i)] = label;
        for (int j = 0; j < spec.dim; ++j)
          data.features(i, j) = prototypes(label, j) + 0.5 * seq.normal();
      }
    }
    return problem;
  }

  const DataSpec& spec() const { return spec_; }
  int num_clients() const { return static_cast<int>(clients_.size()); }
  const ClientData& client(int m) const { return clients_[static_cast<std::size_t>(m)]; }

  int param_dim() const {
    return spec_.family == ModelFamily::kQuadratic ? spec_.dim
                                                   : spec_.classes * (spec_.dim + 1);
  }

  double client_loss(int m, const Vector& params) const {
    const ClientData& data = clients_[static_cast<std::size_t>(m)];
    if (spec_.family == ModelFamily::kQuadratic) return 0.5 * (params - data.center).squaredNorm();
    double total = 0.0;
    for (int i = 0; i < data.features.rows(); ++i)
      total += sample_nll(params, data.features.row(i), data.labels[static_cast<std::size_t>(i)]);
    return total / static_cast<double>(data.features.rows());
  }

  Vector client_gradient(int m, const Vector& params) const {
    const ClientData& data = clients_[static_cast<std::size_t>(m)];
    if (spec_.family == ModelFamily::kQuadratic) return params - data.center;
    Vector grad = Vector::Zero(param_dim());
    for (int i = 0; i < data.features.rows(); ++i)
      accumulate_sample_gradient(params, data.features.row(i),
                                 data.labels[static_cast<std::size_t>(i)], grad);
    return grad / static_cast<double>(data.features.rows());
  }

  Vector client_gradient(int m, const Vector& params, const std::vector<int>& batch) const {
    const ClientData& data = clients_[static_cast<std::size_t>(m)];
    if (spec_.family == ModelFamily::kQuadratic) return params - data.center;
    Vector grad = Vector::Zero(param_dim());
    for (int i : batch)
      accumulate_sample_gradient(params, data.features.row(i),
                                 data.labels[static_cast<std::size_t>(i)], grad);
    return grad / static_cast<double>(batch.size());
  }

  double global_loss(const Vector& params) const {
    double total = 0.0;
    for (int m = 0; m < num_clients(); ++m) total += client_loss(m, params);
    return total / static_cast<double>(num_clients());
  }

  Vector global_gradient(const Vector& params) const {
    Vector grad = Vector::Zero(param_dim());
    for (int m = 0; m < num_clients(); ++m) grad += client_gradient(m, params);
    return grad / static_cast<double>(num_clients());
  }

  std::optional<double> accuracy(const Vector& params) const {
    if (spec_.family != ModelFamily::kSoftmax) return std::nullopt;
    long correct = 0, total = 0;
    for (const auto& data : clients_)
      for (int i = 0; i < data.features.rows(); ++i) {
        int best = 0;
        double best_score = logit(params, data.features.row(i), 0);
        for (int c = 1; c < spec_.classes; ++c) {
          const double score = logit(params, data.features.row(i), c);
          if (score > best_score) { best_score = score; best = c; }
        }
        correct += best == data.labels[static_cast<std::size_t>(i)];
        ++total;
      }
    return static_cast<double>(correct) / static_cast<double>(total);
  }

  // Quadratic objectives have the closed-form minimizer mean(center).
  std::optional<Vector> analytic_optimum() const {
    if (spec_.family != ModelFamily::kQuadratic) return std::nullopt;
    Vector mean = Vector::Zero(spec_.dim);
    for (const auto& data : clients_) mean += data.center;
    return mean / static_cast<double>(num_clients());
  }

  // Per-client squared gradient dissimilarity; for the quadratic family this
  // is exactly |c_m - mean(c)|^2, independent of the evaluation point.
  std::optional<Vector> heterogeneity_bounds() const {
    if (spec_.family != ModelFamily::kQuadratic) return std::nullopt;
    const Vector mean = *analytic_optimum();
    Vector bounds(num_clients());
    for (int m = 0; m < num_clients(); ++m)
      bounds(m) = (clients_[static_cast<std::size_t>(m)].center - mean).squaredNorm();
    return bounds;
  }

 private:
  double logit(const Vector& params, const Eigen::RowVectorXd& x, int c) const {
    const int width = spec_.dim + 1;
    double z = params(c * width + spec_.dim);  // bias
    for (int j = 0; j < spec_.dim; ++j) z += params(c * width + j) * x(j);
    return z;
  }

  double sample_nll(const Vector& params, const Eigen::RowVectorXd& x, int label) const {
    double max_z = logit(params, x, 0);
    for (int c = 1; c < spec_.classes; ++c) max_z = std::max(max_z, logit(params, x, c));
    double denom = 0.0;
    for (int c = 0; c < spec_.classes; ++c) denom += std::exp(logit(params, x, c) - max_z);
    return -(logit(params, x, label) - max_z - std::log(denom));
  }

  void accumulate_sample_gradient(const Vector& params, const Eigen::RowVectorXd& x, int label,
                                  Vector& grad) const {
    const int width = spec_.dim + 1;
    double max_z = logit(params, x, 0);
    for (int c = 1; c < spec_.classes; ++c) max_z = std::max(max_z, logit(params, x, c));
    double denom = 0.0;
    std::vector<double> ez(static_cast<std::size_t>(spec_.classes));
    for (int c = 0; c < spec_.classes; ++c) {
      ez[static_cast<std::size_t>(c)] = std::exp(logit(params, x, c) - max_z);
      denom += ez[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < spec_.classes; ++c) {
      const double delta = ez[static_cast<std::size_t>(c)] / denom - (c == label ? 1.0 : 0.0);
      for (int j = 0; j < spec_.dim; ++j) grad(c * width + j) += delta * x(j);
      grad(c * width + spec_.dim) += delta;
    }
  }

  DataSpec spec_;
  std::vector<ClientData> clients_;
};

struct LocalSgdOptions {
  int steps = 1;
  double learning_rate = 0.1;
  int batch_size = 0;  // 0 = full batch (deterministic, zero sampling variance)
};

// Runs `steps` SGD iterations from `start` on one client's objective and
// returns the resulting model delta.
inline Vector local_sgd(const ErmProblem& problem, int client, const Vector& start,
                        const LocalSgdOptions& opts, std::uint64_t seed, std::uint64_t round) {
  require(opts.steps >= 1, ErrorCode::invalid_params, "local_sgd: steps must be >= 1");
  Vector params = start;
  rng::Sequence batch_seq(seed, rng::kBatch, round, static_cast<std::uint64_t>(client));
  const int sample_count = problem.spec().family == ModelFamily::kSoftmax
                               ? static_cast<int>(problem.client(client).features.rows())
                               : 0;
  for (int i = 0; i < opts.steps; ++i) {
    Vector grad;
    if (opts.batch_size > 0 && sample_count > 0) {
      std::vector<int> batch(static_cast<std::size_t>(opts.batch_size));
      for (int& idx : batch)
        idx = static_cast<int>(batch_seq.below(static_cast<std::uint64_t>(sample_count)));
      grad = problem.client_gradient(client, params, batch);
    } else {
      grad = problem.client_gradient(client, params);
    }
    params -= opts.learning_rate * grad;
    require(params.allFinite(), ErrorCode::divergence, "local_sgd: parameters diverged");
  }
  return params - start;
}

struct EvalResult {
  double loss = 0;
  double grad_norm = 0;
  std::optional<double> accuracy;
};

inline EvalResult evaluate(const ErmProblem& problem, const Vector& params) {
  return {problem.global_loss(params), problem.global_gradient(params).norm(),
          problem.accuracy(params)};
}

struct TrainConfig {
  Strategy strategy = Strategy::kIdealFl;
  int num_clients = 10;        // M
  int local_steps = 1;         // I
  int rounds = 100;            // T
  double learning_rate = 0.1;  // eta
  int stack_attempts = 2;      // attempts stacked per decoding block
  int straggler_tolerance = 0; // s
  int batch_size = 0;
  DataSpec data;
  std::uint64_t seed = 0;
  long retry_cap = 10000;
  DecodeMode plus_mode = DecodeMode::kExact;

  void validate() const {
    require(num_clients >= 1 && local_steps >= 1 && rounds >= 1, ErrorCode::invalid_params,
            "train: M, I, T must be positive");
    require(learning_rate > 0.0, ErrorCode::invalid_params, "train: eta must be positive");
    require(stack_attempts >= 1, ErrorCode::invalid_params, "train: t_r must be >= 1");
    require(retry_cap >= 1, ErrorCode::invalid_params, "train: retry cap must be >= 1");
  }
};

struct RoundRecord {
  int round = 0;
  double loss = 0;
  double grad_norm = 0;
  std::optional<double> accuracy;
  std::string outcome;  // full | full_gc | full_plus | partial | failure | skipped
  int aggregated = 0;   // number of client updates entering the aggregation
  long attempts = 0;    // communication attempts spent this round
  long long tx_cumulative = 0;
};

struct TrainingTrace {
  std::vector<RoundRecord> rounds;
  Vector final_params;
  EvalResult final_eval;
  long long total_transmissions = 0;
  long total_attempts = 0;
};

// Per-round view for tests: where every client started, where it ended, and
// what was applied globally.
struct RoundDebug {
  int round = 0;
  const Matrix& start_points;
  const Matrix& local_models;
  bool global_updated = false;
  Vector applied_update;  // empty when nothing was applied
  Matrix round_updates;   // the shared deltas
};

using TrainObserver = std::function<void(const RoundDebug&)>;

inline TrainingTrace train(const TrainConfig& config, const NetworkModel& net,
                           const TrainObserver& observer = {}) {
  config.validate();
  net.validate();
  require(net.num_clients() == config.num_clients, ErrorCode::invalid_params,
          "train: network size must match M");
  const bool coded = config.strategy == Strategy::kCogcDesign1 ||
                     config.strategy == Strategy::kCogcDesign2 ||
                     config.strategy == Strategy::kGcPlus;
  if (coded)
    CodeParams{config.num_clients, config.straggler_tolerance, 0}.validate();

  const ErmProblem problem = ErmProblem::generate(config.num_clients, config.data, config.seed);
  const int m_count = config.num_clients;
  const int dim = problem.param_dim();
  const LocalSgdOptions sgd{config.local_steps, config.learning_rate, config.batch_size};

  Vector global = Vector::Zero(dim);
  Matrix locals = Matrix::Zero(m_count, dim);  // each client's latest local model
  bool last_round_updated = true;              // round 1 starts from the initial broadcast

  TrainingTrace trace;
  trace.rounds.reserve(static_cast<std::size_t>(config.rounds));
  long long tx = 0;

  const auto code_seed = [&](std::uint64_t round, std::uint64_t attempt) {
    return rng::word(config.seed, rng::kTrial, round, attempt, 0x636f6465ULL);
  };

  const auto run_attempt = [&](std::uint64_t round, std::uint64_t attempt,
                               const LocalUpdateSet& updates) {
    const CyclicCode code = generate_code(
        {m_count, config.straggler_tolerance, code_seed(round, attempt)});
    const RoundConnectivity conn = draw_round(net, {config.seed, round, attempt});
    RoundTranscript transcript = gradient_share(code, conn, updates);
    return AttemptRecord{code, std::move(transcript)};
  };

  for (int round = 1; round <= config.rounds; ++round) {
    // Eq.-style init rule: broadcast when the last round updated the global
    // model, otherwise continue from one's own local model.
    Matrix starts(m_count, dim);
    for (int m = 0; m < m_count; ++m) {
      if (config.strategy == Strategy::kCogcDesign2 && !last_round_updated)
        starts.row(m) = locals.row(m);
      else
        starts.row(m) = global.transpose();
    }

    Matrix updates(m_count, dim);
    for (int m = 0; m < m_count; ++m)
      updates.row(m) = local_sgd(problem, m, starts.row(m).transpose(), sgd, config.seed,
                                 static_cast<std::uint64_t>(round))
                           .transpose();
    locals = starts + updates;

    RoundRecord record;
    record.round = round;
    bool updated = false;
    Vector applied;

    switch (config.strategy) {
      case Strategy::kIdealFl: {
        applied = updates.colwise().mean().transpose();
        global += applied;
        updated = true;
        tx += m_count;
        record.outcome = "full";
        record.aggregated = m_count;
        record.attempts = 1;
        break;
      }
      case Strategy::kIntermittentFl: {
        const RoundConnectivity conn =
            draw_round(net, {config.seed, static_cast<std::uint64_t>(round), 0});
        std::vector<int> received;
        for (int m = 0; m < m_count; ++m)
          if (conn.uplinks(m) != 0) received.push_back(m);
        tx += m_count;
        record.attempts = 1;
        if (received.empty()) {
          record.outcome = "skipped";
          record.aggregated = 0;
        } else {
          applied = Vector::Zero(dim);
          for (int m : received) applied += updates.row(m).transpose();
          applied /= static_cast<double>(received.size());
          global += applied;
          updated = true;
          record.outcome = "partial";
          record.aggregated = static_cast<int>(received.size());
        }
        break;
      }
      case Strategy::kCogcDesign1: {
        long attempt = 0;
        for (;;) {
          if (attempt >= config.retry_cap)
            fail(ErrorCode::retry_exhausted, "train: design-1 retry cap exhausted");
          const AttemptRecord rec = run_attempt(static_cast<std::uint64_t>(round),
                                                static_cast<std::uint64_t>(attempt), updates);
          ++attempt;
          tx += transmissions_per_round(m_count, config.straggler_tolerance,
                                        static_cast<int>(rec.transcript.complete_owners.size()));
          const DecodeOutcome outcome = gc_decode(rec.code, rec.transcript);
          if (outcome.kind == DecodeKind::kFullViaGc) {
            applied = *outcome.global_update;
            global += applied;
            updated = true;
            record.outcome = to_string(outcome.kind);
            record.aggregated = m_count;
            break;
          }
        }
        record.attempts = attempt;
        break;
      }
      case Strategy::kCogcDesign2: {
        const AttemptRecord rec =
            run_attempt(static_cast<std::uint64_t>(round), 0, updates);
        tx += transmissions_per_round(m_count, config.straggler_tolerance,
                                      static_cast<int>(rec.transcript.complete_owners.size()));
        record.attempts = 1;
        const DecodeOutcome outcome = gc_decode(rec.code, rec.transcript);
        if (outcome.kind == DecodeKind::kFullViaGc) {
          applied = *outcome.global_update;
          global += applied;
          updated = true;
        }
        record.outcome = to_string(outcome.kind);
        record.aggregated = updated ? m_count : 0;

        // After the last regular round, keep re-transmitting the final
        // updates (no further local training) until one recovery lands or
        // the cap runs out; the run then ends either way.
        if (round == config.rounds && !updated) {
          for (long attempt = 1; attempt <= config.retry_cap; ++attempt) {
            const AttemptRecord retry = run_attempt(static_cast<std::uint64_t>(round),
                                                    static_cast<std::uint64_t>(attempt), updates);
            tx += transmissions_per_round(
                m_count, config.straggler_tolerance,
                static_cast<int>(retry.transcript.complete_owners.size()));
            ++record.attempts;
            const DecodeOutcome tail = gc_decode(retry.code, retry.transcript);
            if (tail.kind == DecodeKind::kFullViaGc) {
              applied = *tail.global_update;
              global += applied;
              updated = true;
              record.outcome = to_string(tail.kind);
              record.aggregated = m_count;
              break;
            }
          }
        }
        break;
      }
      case Strategy::kGcPlus: {
        long blocks = 0;
        DecodeOutcome outcome;
        for (;;) {
          if (blocks >= config.retry_cap)
            fail(ErrorCode::retry_exhausted, "train: stacked-decoding retry cap exhausted");
          std::vector<AttemptRecord> attempts;
          attempts.reserve(static_cast<std::size_t>(config.stack_attempts));
          for (int i = 0; i < config.stack_attempts; ++i) {
            const auto attempt_id =
                static_cast<std::uint64_t>(blocks) * static_cast<std::uint64_t>(config.stack_attempts) +
                static_cast<std::uint64_t>(i);
            attempts.push_back(
                run_attempt(static_cast<std::uint64_t>(round), attempt_id, updates));
            tx += transmissions_per_round(m_count, config.straggler_tolerance, m_count);
          }
          ++blocks;
          outcome = gc_plus_decode(stack_transcripts(std::move(attempts)), config.plus_mode);
          if (outcome.kind != DecodeKind::kFailure) break;
        }
        applied = *outcome.global_update;
        global += applied;
        updated = true;
        record.outcome = to_string(outcome.kind);
        record.aggregated = static_cast<int>(outcome.decoded.size());
        record.attempts = blocks * config.stack_attempts;
        break;
      }
    }

    last_round_updated = updated;
    trace.total_attempts += record.attempts;

    const EvalResult eval = evaluate(problem, global);
    record.loss = eval.loss;
    record.grad_norm = eval.grad_norm;
    record.accuracy = eval.accuracy;
    record.tx_cumulative = tx;
    trace.rounds.push_back(record);

    if (observer)
      observer(RoundDebug{round, starts, locals, updated,
                          updated ? applied : Vector(), updates});
  }

  trace.final_params = global;
  trace.final_eval = evaluate(problem, global);
  trace.total_transmissions = tx;
  return trace;
}

}  // namespace cogc
