// Command-line front end: code generation, outage analytics, cost-efficient
// design search, Monte Carlo validation, bound evaluators, and training runs.
//
// Exit codes: 0 success, 2 usage error, 3 infeasible design target,
// 4 numerical failure, 5 I/O error.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cogc/analysis.hpp"
#include "cogc/channel.hpp"
#include "cogc/code.hpp"
#include "cogc/experiments.hpp"
#include "cogc/io.hpp"
#include "cogc/protocol.hpp"
#include "cogc/training.hpp"

namespace {

using cogc::io::json;

struct NetworkFlags {
  std::string file;
  int num_clients = 0;
  double p_c2c = 0.0;
  double p_up = 0.0;
};

void add_network_flags(CLI::App* cmd, NetworkFlags* flags) {
  cmd->add_option("--network", flags->file, "network model JSON file");
  cmd->add_option("--M", flags->num_clients, "number of clients (uniform shorthand)");
  cmd->add_option("--p-c2c", flags->p_c2c, "uniform client-to-client outage probability");
  cmd->add_option("--p-up", flags->p_up, "uniform client-to-server outage probability");
}

cogc::NetworkModel resolve_network(const NetworkFlags& flags) {
  if (!flags.file.empty()) return cogc::io::load_network_file(flags.file);
  cogc::require(flags.num_clients >= 1, cogc::ErrorCode::invalid_params,
                "either --network or --M is required");
  return cogc::NetworkModel::uniform(flags.num_clients, flags.p_c2c, flags.p_up);
}

std::string default_output_dir() {
  const char* env = std::getenv("COGC_OUTPUT_DIR");
  return env && *env ? env : ".";
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty())
    std::cout << text;
  else
    cogc::io::write_text_file(out_path, text);
}

json report_to_json(const cogc::McReport& report) {
  json out{{"estimate", report.estimate},
           {"std_error", report.std_error},
           {"trials", report.trials}};
  if (report.target) out["target"] = *report.target;
  if (report.z_score) out["z_score"] = *report.z_score;
  return out;
}

std::string report_to_text(const cogc::McReport& report) {
  std::ostringstream out;
  out << "estimate  " << cogc::io::format_double(report.estimate) << "\n";
  out << "std_error " << cogc::io::format_double(report.std_error) << "\n";
  out << "trials    " << report.trials << "\n";
  if (report.target) out << "target    " << cogc::io::format_double(*report.target) << "\n";
  if (report.z_score) out << "z_score   " << cogc::io::format_double(*report.z_score) << "\n";
  return out.str();
}

json profile_to_json(const cogc::RecoveryProfile& profile) {
  json partial = json::object();
  for (std::size_t k = 1; k < profile.partial.size(); ++k)
    if (profile.partial[k] > 0) partial[std::to_string(k)] = profile.partial[k];
  return json{{"trials", profile.trials},
              {"full_via_gc", profile.full_via_gc},
              {"full_via_plus", profile.full_via_plus},
              {"partial", partial},
              {"partial_total", profile.partial_total()},
              {"failure", profile.failure},
              {"full_rate", profile.full_rate()},
              {"full_rate_std_error", profile.full_rate_std_error()},
              {"max_recovered_rel_error", profile.max_recovered_rel_error},
              {"aggregation_mismatches", profile.aggregation_mismatches}};
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (item.empty()) continue;
    values.push_back(std::stod(item));
  }
  cogc::require(!values.empty(), cogc::ErrorCode::invalid_params, "empty list: " + text);
  return values;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cooperative gradient coding laboratory"};
  app.require_subcommand(1);

  std::string format = "text";
  app.add_option("--format", format, "output format: text | json | csv")->capture_default_str();

  // ---- gen-code ----
  auto* gen = app.add_subcommand("gen-code", "generate a cyclic gradient code (JSON)");
  int gen_m = 0, gen_s = 0;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen->add_option("--M", gen_m, "number of clients")->required();
  gen->add_option("--s", gen_s, "straggler tolerance")->required();
  gen->add_option("--seed", gen_seed, "generation seed");
  gen->add_option("--out", gen_out, "output file (default stdout)");
  gen->callback([&] {
    const cogc::CyclicCode code = cogc::generate_code({gen_m, gen_s, gen_seed});
    emit(cogc::io::code_to_json(code).dump(2) + "\n", gen_out);
  });

  // ---- outage ----
  auto* outage = app.add_subcommand("outage", "closed-form outage breakdown");
  NetworkFlags outage_net;
  int outage_s = 0;
  bool printed_p32 = false;
  std::string outage_out;
  add_network_flags(outage, &outage_net);
  outage->add_option("--s", outage_s, "straggler tolerance")->required();
  outage->add_flag("--printed-p32", printed_p32,
                   "use the printed subcase-3 variant instead of the uplink form");
  outage->add_option("--out", outage_out, "output file (default stdout)");
  outage->callback([&] {
    const cogc::NetworkModel net = resolve_network(outage_net);
    const auto breakdown = cogc::outage_probability(
        net, outage_s,
        printed_p32 ? cogc::Subcase3Form::kPrinted : cogc::Subcase3Form::kVerbal);
    if (format == "json")
      emit(cogc::io::breakdown_to_json(outage_s, breakdown).dump(2) + "\n", outage_out);
    else if (format == "csv")
      emit(cogc::io::breakdown_to_csv(outage_s, breakdown), outage_out);
    else
      emit(cogc::io::breakdown_to_text(outage_s, breakdown), outage_out);
  });

  // ---- design ----
  auto* design = app.add_subcommand("design", "smallest s meeting a target outage");
  NetworkFlags design_net;
  double design_target = 0.0;
  std::string design_out;
  add_network_flags(design, &design_net);
  design->add_option("--target", design_target, "target outage probability in (0, 1]")->required();
  design->add_option("--out", design_out, "output file (default stdout)");
  design->callback([&] {
    const cogc::NetworkModel net = resolve_network(design_net);
    const int best = cogc::cost_efficient_s(net, design_target);
    const int m_count = net.num_clients();
    json scan = json::array();
    for (int s = 0; s < m_count; ++s) {
      const auto b = cogc::outage_probability(net, s);
      scan.push_back(json{{"s", s},
                          {"P_O", b.p_o},
                          {"feasible", b.p_o <= design_target},
                          {"tx_max", cogc::transmissions_per_round(m_count, s, m_count)},
                          {"tx_expected",
                           static_cast<double>(s) * m_count + (1.0 - b.p11.array()).sum()}});
    }
    const auto chosen = cogc::outage_probability(net, best);
    json out{{"target", design_target},
             {"s_star", best},
             {"P_O", chosen.p_o},
             {"tx_max", cogc::transmissions_per_round(m_count, best, m_count)},
             {"tx_expected",
              static_cast<double>(best) * m_count + (1.0 - chosen.p11.array()).sum()},
             {"scan", scan}};
    if (chosen.p_o < 1.0) out["E_retries"] = cogc::expected_retries(chosen.p_o);
    if (format == "json") {
      emit(out.dump(2) + "\n", design_out);
    } else {
      std::ostringstream text;
      text << "s_star      " << best << "\n";
      text << "P_O         " << cogc::io::format_double(chosen.p_o) << "\n";
      text << "tx_max      " << out["tx_max"].get<long>() << "\n";
      text << "tx_expected " << cogc::io::format_double(out["tx_expected"].get<double>()) << "\n";
      if (out.contains("E_retries"))
        text << "E_retries   " << cogc::io::format_double(out["E_retries"].get<double>()) << "\n";
      text << "s  P_O  feasible\n";
      for (const auto& row : scan)
        text << row["s"].get<int>() << "  " << cogc::io::format_double(row["P_O"].get<double>())
             << "  " << (row["feasible"].get<bool>() ? "yes" : "no") << "\n";
      emit(text.str(), design_out);
    }
  });

  // ---- mc ----
  auto* mc = app.add_subcommand("mc", "Monte Carlo validation");
  mc->require_subcommand(1);

  auto* mc_outage_cmd = mc->add_subcommand("outage", "estimate the overall outage probability");
  NetworkFlags mco_net;
  int mco_s = 0;
  long mco_trials = 100000;
  std::uint64_t mco_seed = 0;
  std::string mco_out;
  add_network_flags(mc_outage_cmd, &mco_net);
  mc_outage_cmd->add_option("--s", mco_s, "straggler tolerance")->required();
  mc_outage_cmd->add_option("--trials", mco_trials, "trial count")->capture_default_str();
  mc_outage_cmd->add_option("--seed", mco_seed, "simulation seed");
  mc_outage_cmd->add_option("--out", mco_out, "output file (default stdout)");
  mc_outage_cmd->callback([&] {
    const auto report = cogc::mc_outage(resolve_network(mco_net), mco_s, mco_trials, mco_seed);
    emit(format == "json" ? report_to_json(report).dump(2) + "\n" : report_to_text(report),
         mco_out);
  });

  auto* mc_recovery_cmd = mc->add_subcommand("recovery", "stacked-decoder outcome histogram");
  NetworkFlags mcr_net;
  int mcr_s = 0, mcr_tr = 2, mcr_dim = 2;
  long mcr_trials = 10000, mcr_dump = 0;
  std::uint64_t mcr_seed = 0;
  std::string mcr_mode = "exact", mcr_out, mcr_dump_file;
  bool mcr_reuse = false;
  add_network_flags(mc_recovery_cmd, &mcr_net);
  mc_recovery_cmd->add_option("--s", mcr_s, "straggler tolerance")->required();
  mc_recovery_cmd->add_option("--t-r", mcr_tr, "attempts stacked per trial")->capture_default_str();
  mc_recovery_cmd->add_option("--trials", mcr_trials, "trial count")->capture_default_str();
  mc_recovery_cmd->add_option("--seed", mcr_seed, "simulation seed");
  mc_recovery_cmd->add_option("--mode", mcr_mode, "decoder: exact | paper")->capture_default_str();
  mc_recovery_cmd->add_option("--dim", mcr_dim, "update dimension")->capture_default_str();
  mc_recovery_cmd->add_flag("--reuse-code", mcr_reuse, "reuse one code across attempts");
  mc_recovery_cmd->add_option("--dump", mcr_dump, "dump the first N trial transcripts");
  mc_recovery_cmd->add_option("--dump-file", mcr_dump_file, "transcript dump path (JSON)");
  mc_recovery_cmd->add_option("--out", mcr_out, "output file (default stdout)");
  mc_recovery_cmd->callback([&] {
    std::vector<json> dump;
    const auto profile = cogc::mc_recovery_profile(
        resolve_network(mcr_net), mcr_s, mcr_tr, mcr_trials, mcr_seed,
        mcr_mode == "paper" ? cogc::DecodeMode::kPaperApprox : cogc::DecodeMode::kExact,
        mcr_reuse, mcr_dim, mcr_dump > 0 ? &dump : nullptr, mcr_dump);
    if (mcr_dump > 0 && !mcr_dump_file.empty())
      cogc::io::write_text_file(mcr_dump_file, json(dump).dump(2) + "\n");
    emit(profile_to_json(profile).dump(2) + "\n", mcr_out);
  });

  auto* mc_kbar_cmd = mc->add_subcommand("kbar", "conditional mean of 1/|K4|");
  NetworkFlags mck_net;
  int mck_s = 0, mck_tr = 2;
  long mck_trials = 10000;
  std::uint64_t mck_seed = 0;
  std::string mck_out;
  add_network_flags(mc_kbar_cmd, &mck_net);
  mc_kbar_cmd->add_option("--s", mck_s, "straggler tolerance")->required();
  mc_kbar_cmd->add_option("--t-r", mck_tr, "attempts stacked per trial")->capture_default_str();
  mc_kbar_cmd->add_option("--trials", mck_trials, "trial count")->capture_default_str();
  mc_kbar_cmd->add_option("--seed", mck_seed, "simulation seed");
  mc_kbar_cmd->add_option("--out", mck_out, "output file (default stdout)");
  mc_kbar_cmd->callback([&] {
    const auto report =
        cogc::mc_kbar(resolve_network(mck_net), mck_s, mck_tr, mck_trials, mck_seed);
    emit(format == "json" ? report_to_json(report).dump(2) + "\n" : report_to_text(report),
         mck_out);
  });

  auto* mc_retries_cmd = mc->add_subcommand("retries", "geometric retry count sampler");
  double mcg_po = 0.5;
  long mcg_trials = 100000;
  std::uint64_t mcg_seed = 0;
  std::string mcg_out;
  mc_retries_cmd->add_option("--p-o", mcg_po, "per-attempt outage probability")->required();
  mc_retries_cmd->add_option("--trials", mcg_trials, "trial count")->capture_default_str();
  mc_retries_cmd->add_option("--seed", mcg_seed, "simulation seed");
  mc_retries_cmd->add_option("--out", mcg_out, "output file (default stdout)");
  mc_retries_cmd->callback([&] {
    const auto report = cogc::mc_geometric_retries(mcg_po, mcg_trials, mcg_seed);
    emit(format == "json" ? report_to_json(report).dump(2) + "\n" : report_to_text(report),
         mcg_out);
  });

  // ---- bound ----
  auto* bound = app.add_subcommand("bound", "closed-form bound evaluators");
  bound->require_subcommand(1);

  auto* bc = bound->add_subcommand("convergence", "binary-recovery convergence bound");
  int bc_m = 10, bc_i = 1, bc_t = 1000;
  double bc_l = 1.0, bc_sigma2 = 0.0, bc_po = 0.1, bc_gap = 1.0;
  std::string bc_d2 = "0", bc_pup = "0", bc_out;
  bc->add_option("--M", bc_m, "clients")->capture_default_str();
  bc->add_option("--I", bc_i, "local steps")->capture_default_str();
  bc->add_option("--T", bc_t, "rounds")->capture_default_str();
  bc->add_option("--L", bc_l, "smoothness constant")->capture_default_str();
  bc->add_option("--sigma2", bc_sigma2, "data variance")->capture_default_str();
  bc->add_option("--D2", bc_d2, "heterogeneity bounds (scalar or comma list)")
      ->capture_default_str();
  bc->add_option("--p-up", bc_pup, "uplink outages (scalar or comma list)")
      ->capture_default_str();
  bc->add_option("--P-O", bc_po, "overall outage probability")->capture_default_str();
  bc->add_option("--F-gap", bc_gap, "initial objective gap")->capture_default_str();
  bc->add_option("--out", bc_out, "output file (default stdout)");
  bc->callback([&] {
    cogc::ConvergenceBoundParams params;
    params.num_clients = bc_m;
    params.local_steps = bc_i;
    params.rounds = bc_t;
    params.smoothness = bc_l;
    params.data_variance = bc_sigma2;
    params.outage_overall = bc_po;
    params.objective_gap = bc_gap;
    const auto fill = [&](const std::string& text) {
      const auto values = parse_list(text);
      cogc::Vector v(bc_m);
      if (values.size() == 1)
        v.setConstant(values[0]);
      else {
        cogc::require(static_cast<int>(values.size()) == bc_m, cogc::ErrorCode::invalid_params,
                      "list length must equal M");
        for (int m = 0; m < bc_m; ++m) v(m) = values[static_cast<std::size_t>(m)];
      }
      return v;
    };
    params.heterogeneity = fill(bc_d2);
    params.outage_up = fill(bc_pup);
    const auto b = cogc::convergence_bound(params);
    emit(json{{"mu_J1", b.mu_j1},
              {"mu_J2", b.mu_j2},
              {"sigma_J1", b.sigma_j1},
              {"sigma_J2", b.sigma_j2},
              {"term_ratio", b.term_ratio},
              {"term_var_J2", b.term_var_j2},
              {"term_var_J1", b.term_var_j1},
              {"term_cross", b.term_cross},
              {"epsilon", b.epsilon}}
                 .dump(2) +
             "\n",
         bc_out);
  });

  auto* bk = bound->add_subcommand("kstar", "harmonic participation bound K*");
  int bk_m = 10, bk_s = 7, bk_tr = 4;
  double bk_p = 0.5, bk_po = 0.9;
  std::string bk_out;
  bk->add_option("--M", bk_m, "clients")->capture_default_str();
  bk->add_option("--s", bk_s, "straggler tolerance")->capture_default_str();
  bk->add_option("--t-r", bk_tr, "attempts per stack")->capture_default_str();
  bk->add_option("--p", bk_p, "homogeneous erasure probability")->capture_default_str();
  bk->add_option("--P-O", bk_po, "per-attempt outage probability")->capture_default_str();
  bk->add_option("--out", bk_out, "output file (default stdout)");
  bk->callback([&] {
    const double k = cogc::k_star(bk_m, bk_s, bk_tr, bk_p, bk_po);
    emit(json{{"k_star", k}, {"inv_k_star", 1.0 / k}}.dump(2) + "\n", bk_out);
  });

  auto* br = bound->add_subcommand("recovery", "full-recovery lower bound");
  int br_m = 10, br_s = 7, br_tr = 4;
  double br_p = 0.5;
  std::string br_out;
  br->add_option("--M", br_m, "clients")->capture_default_str();
  br->add_option("--s", br_s, "straggler tolerance")->capture_default_str();
  br->add_option("--t-r", br_tr, "attempts per stack")->capture_default_str();
  br->add_option("--p", br_p, "homogeneous erasure probability")->capture_default_str();
  br->add_option("--out", br_out, "output file (default stdout)");
  br->callback([&] {
    emit(json{{"lower_bound", cogc::full_recovery_lower_bound(br_m, br_s, br_tr, br_p)}}.dump(2) +
             "\n",
         br_out);
  });

  auto* bl = bound->add_subcommand("lmip", "information leakage of one partial sum");
  std::string bl_b, bl_vars, bl_out;
  int bl_client = 1, bl_dim = 1;
  bl->add_option("--b", bl_b, "coefficients, comma list")->required();
  bl->add_option("--var", bl_vars, "per-client isotropic variances, comma list")->required();
  bl->add_option("--m", bl_client, "client of interest (1-based)")->capture_default_str();
  bl->add_option("--d", bl_dim, "update dimension")->capture_default_str();
  bl->add_option("--out", bl_out, "output file (default stdout)");
  bl->callback([&] {
    const auto b_values = parse_list(bl_b);
    const auto var_values = parse_list(bl_vars);
    cogc::require(b_values.size() == var_values.size(), cogc::ErrorCode::invalid_params,
                  "--b and --var must have equal length");
    cogc::Vector weights(static_cast<Eigen::Index>(b_values.size()));
    std::vector<cogc::Matrix> covariances;
    for (std::size_t k = 0; k < b_values.size(); ++k) {
      weights(static_cast<Eigen::Index>(k)) = b_values[k];
      covariances.push_back(var_values[k] * cogc::Matrix::Identity(bl_dim, bl_dim));
    }
    const double bits = cogc::lmip_bits(weights, covariances, bl_client - 1, bl_dim);
    emit(json{{"bits", bits}}.dump(2) + "\n", bl_out);
  });

  auto* bg = bound->add_subcommand("gc-plus", "stacked-decoder training bound");
  cogc::PartialAveragingBoundParams bg_params;
  bg_params.rounds = 100;
  bg_params.local_steps = 5;
  bg_params.k_star = 5.0;
  bg_params.smoothness = 1.0;
  bg_params.batch_size = 32;
  std::string bg_out;
  bg->add_option("--T", bg_params.rounds, "rounds")->capture_default_str();
  bg->add_option("--I", bg_params.local_steps, "local steps")->capture_default_str();
  bg->add_option("--k-star", bg_params.k_star, "participation bound K*")->capture_default_str();
  bg->add_option("--L", bg_params.smoothness, "smoothness constant")->capture_default_str();
  bg->add_option("--F-gap", bg_params.objective_gap, "initial objective gap");
  bg->add_option("--G2", bg_params.grad_sq_mean, "mean squared local gradient norm");
  bg->add_option("--sigma2", bg_params.data_variance, "data variance");
  bg->add_option("--batch", bg_params.batch_size, "batch size")->capture_default_str();
  bg->add_option("--D2-mean", bg_params.heterogeneity_mean, "mean heterogeneity bound");
  bg->add_option("--out", bg_out, "output file (default stdout)");
  bg->callback([&] {
    const auto b = cogc::gc_plus_convergence_bound(bg_params);
    emit(json{{"term_init", b.term_init},
              {"term_drift", b.term_drift},
              {"term_variance", b.term_variance},
              {"term_hetero", b.term_hetero},
              {"total", b.total}}
                 .dump(2) +
             "\n",
         bg_out);
  });

  // ---- train ----
  auto* train_cmd = app.add_subcommand("train", "run one training strategy");
  NetworkFlags train_net;
  cogc::TrainConfig train_config;
  std::string train_strategy = "ideal", train_family = "quadratic", train_mode = "exact";
  std::string train_out = default_output_dir(), train_name = "trace", train_config_file;
  add_network_flags(train_cmd, &train_net);
  train_cmd->add_option("--strategy", train_strategy,
                        "ideal | intermittent | cogc_d1 | cogc_d2 | gc_plus")
      ->capture_default_str();
  train_cmd->add_option("--s", train_config.straggler_tolerance, "straggler tolerance");
  train_cmd->add_option("--T", train_config.rounds, "training rounds")->capture_default_str();
  train_cmd->add_option("--I", train_config.local_steps, "local steps per round")
      ->capture_default_str();
  train_cmd->add_option("--eta", train_config.learning_rate, "learning rate")
      ->capture_default_str();
  train_cmd->add_option("--t-r", train_config.stack_attempts, "attempts per decoding block")
      ->capture_default_str();
  train_cmd->add_option("--family", train_family, "quadratic | softmax")->capture_default_str();
  train_cmd->add_option("--dim", train_config.data.dim, "data dimension")->capture_default_str();
  train_cmd->add_option("--classes", train_config.data.classes, "softmax classes")
      ->capture_default_str();
  train_cmd->add_option("--samples", train_config.data.samples_per_client,
                        "softmax samples per client")
      ->capture_default_str();
  train_cmd->add_option("--skew", train_config.data.skew, "heterogeneity control")
      ->capture_default_str();
  train_cmd->add_option("--batch", train_config.batch_size, "batch size (0 = full)")
      ->capture_default_str();
  train_cmd->add_option("--seed", train_config.seed, "run seed");
  train_cmd->add_option("--retry-cap", train_config.retry_cap, "attempt cap per round")
      ->capture_default_str();
  train_cmd->add_option("--mode", train_mode, "stacked decoder: exact | paper")
      ->capture_default_str();
  train_cmd->add_option("--out", train_out, "output directory")->capture_default_str();
  train_cmd->add_option("--name", train_name, "trace file stem")->capture_default_str();
  train_cmd->add_option("--config", train_config_file,
                        "JSON config; values present there override flags");
  train_cmd->callback([&] {
    cogc::NetworkModel net = resolve_network(train_net);
    train_config.strategy = cogc::strategy_from_string(train_strategy);
    train_config.data.family = cogc::family_from_string(train_family);
    train_config.plus_mode =
        train_mode == "paper" ? cogc::DecodeMode::kPaperApprox : cogc::DecodeMode::kExact;
    train_config.num_clients = net.num_clients();
    if (!train_config_file.empty()) {
      const json patch =
          cogc::io::parse_json(cogc::io::read_text_file(train_config_file), train_config_file);
      if (patch.contains("network")) net = cogc::io::network_from_json(patch.at("network"));
      cogc::TrainConfig from_file = train_config;
      if (patch.contains("M")) from_file.num_clients = patch.at("M").get<int>();
      if (patch.contains("I")) from_file.local_steps = patch.at("I").get<int>();
      if (patch.contains("T")) from_file.rounds = patch.at("T").get<int>();
      if (patch.contains("eta")) from_file.learning_rate = patch.at("eta").get<double>();
      if (patch.contains("t_r")) from_file.stack_attempts = patch.at("t_r").get<int>();
      if (patch.contains("s")) from_file.straggler_tolerance = patch.at("s").get<int>();
      if (patch.contains("batch")) from_file.batch_size = patch.at("batch").get<int>();
      if (patch.contains("seed")) from_file.seed = patch.at("seed").get<std::uint64_t>();
      if (patch.contains("retry_cap")) from_file.retry_cap = patch.at("retry_cap").get<long>();
      if (patch.contains("strategy"))
        from_file.strategy = cogc::strategy_from_string(patch.at("strategy"));
      if (patch.contains("family"))
        from_file.data.family = cogc::family_from_string(patch.at("family"));
      if (patch.contains("dim")) from_file.data.dim = patch.at("dim").get<int>();
      if (patch.contains("classes")) from_file.data.classes = patch.at("classes").get<int>();
      if (patch.contains("samples_per_client"))
        from_file.data.samples_per_client = patch.at("samples_per_client").get<int>();
      if (patch.contains("skew")) from_file.data.skew = patch.at("skew").get<double>();
      train_config = from_file;
      train_config.num_clients = net.num_clients();
    }
    const cogc::TrainingTrace trace = cogc::train(train_config, net);
    cogc::io::write_text_file(train_out + "/" + train_name + ".csv",
                              cogc::io::trace_to_csv(trace, train_config.strategy));
    cogc::io::write_text_file(train_out + "/" + train_name + ".config.json",
                              cogc::io::train_config_to_json(train_config).dump(2) + "\n");
    json summary{{"final_loss", trace.final_eval.loss},
                 {"final_grad_norm", trace.final_eval.grad_norm},
                 {"total_transmissions", trace.total_transmissions},
                 {"total_attempts", trace.total_attempts}};
    if (trace.final_eval.accuracy) summary["final_accuracy"] = *trace.final_eval.accuracy;
    std::cout << summary.dump(2) << "\n";
  });

  // ---- suite ----
  auto* suite = app.add_subcommand("suite", "run an experiment sweep config");
  std::string suite_config, suite_out = default_output_dir();
  suite->add_option("--config", suite_config, "sweep config JSON")->required();
  suite->add_option("--out", suite_out, "output directory")->capture_default_str();
  suite->callback([&] {
    const json config =
        cogc::io::parse_json(cogc::io::read_text_file(suite_config), suite_config);
    const auto result = cogc::run_experiment_suite(config, suite_out);
    std::cout << json{{"traces", result.trace_files.size()},
                      {"summary", result.summary_file}}
                     .dump(2)
              << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp" ||
        e.get_name() == "CallForVersion")
      return app.exit(e);
    std::cerr << "error kind=usage msg=\"" << e.what() << "\"\n";
    return 2;
  } catch (const cogc::Error& e) {
    std::cerr << "error kind=" << e.category() << " msg=\"" << e.what() << "\"\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error kind=internal msg=\"" << e.what() << "\"\n";
    return 4;
  }
  return 0;
}
