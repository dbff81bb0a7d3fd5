#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "cogc/experiments.hpp"
#include "support/oracles.hpp"

using namespace cogc;

TEST_CASE("outage estimate is exact on a perfect network", "[experiments]") {
  const McReport report = mc_outage(NetworkModel::uniform(4, 0.0, 0.0), 1, 2000, 1);
  CHECK(report.estimate == 0.0);
  CHECK(*report.target == 0.0);
}

TEST_CASE("outage estimate matches the closed form", "[experiments]") {
  const McReport report = mc_outage(NetworkModel::uniform(3, 0.0, 0.5), 1, 20000, 5);
  CHECK(*report.target == 0.5);
  CHECK(std::abs(*report.z_score) <= 4.0);

  NetworkModel het = NetworkModel::uniform(5, 0.0, 0.0);
  for (int m = 0; m < 5; ++m) {
    het.outage_up(m) = 0.1 + 0.15 * m;
    for (int k = 0; k < 5; ++k)
      if (m != k) het.outage_c2c(m, k) = 0.05 + 0.07 * ((m + 2 * k) % 5);
  }
  const McReport het_report = mc_outage(het, 2, 20000, 6);
  CHECK_THAT(*het_report.target,
             Catch::Matchers::WithinAbs(oracles::enumerate_outage(het, 2), 1e-12));
  CHECK(std::abs(*het_report.z_score) <= 4.0);
}

TEST_CASE("recovery profile on a perfect network is all standard decodes", "[experiments]") {
  const RecoveryProfile profile =
      mc_recovery_profile(NetworkModel::uniform(6, 0.0, 0.0), 2, 2, 500, 3);
  CHECK(profile.full_via_gc == 500);
  CHECK(profile.failure == 0);
  CHECK(profile.partial_total() == 0);
}

TEST_CASE("full recovery clears its lower bound", "[experiments]") {
  const NetworkModel net = NetworkModel::uniform(10, 0.5, 0.5);
  const RecoveryProfile profile = mc_recovery_profile(net, 7, 4, 4000, 9);
  const double bound = full_recovery_lower_bound(10, 7, 4, 0.5);
  CHECK(profile.full_rate() >= bound - 4.0 * profile.full_rate_std_error());
  CHECK(profile.max_recovered_rel_error <= 1e-7);
  CHECK(profile.aggregation_mismatches == 0);
}

TEST_CASE("conditional inverse participation", "[experiments]") {
  const McReport perfect = mc_kbar(NetworkModel::uniform(5, 0.0, 0.0), 2, 2, 300, 2);
  CHECK(perfect.estimate == 1.0 / 5.0);

  const McReport mid = mc_kbar(NetworkModel::uniform(10, 0.5, 0.5), 7, 4, 3000, 4);
  REQUIRE(mid.target.has_value());
  CHECK(mid.estimate <= *mid.target + 4.0 * mid.std_error);

  CHECK_THROWS_AS(mc_kbar(NetworkModel::uniform(4, 0.0, 1.0), 1, 2, 50, 3), Error);
}

TEST_CASE("geometric retry sampler agrees with the closed form", "[experiments]") {
  const McReport coin = mc_geometric_retries(0.5, 100000, 11);
  CHECK(*coin.target == 2.0);
  CHECK(std::abs(coin.estimate - 2.0) <= 3.0 * coin.std_error);

  const McReport heavy = mc_geometric_retries(0.9, 20000, 12);
  CHECK_THAT(*heavy.target, Catch::Matchers::WithinAbs(10.0, 1e-9));
  CHECK(std::abs(*heavy.z_score) <= 4.0);
}

TEST_CASE("estimates are reproducible from the seed", "[experiments]") {
  const NetworkModel net = NetworkModel::uniform(6, 0.3, 0.3);
  const McReport a = mc_outage(net, 2, 5000, 42);
  const McReport b = mc_outage(net, 2, 5000, 42);
  CHECK(a.estimate == b.estimate);
  const McReport c = mc_outage(net, 2, 5000, 43);
  CHECK(a.estimate != c.estimate);
}

TEST_CASE("an empty sweep list writes only the summary", "[experiments]") {
  const auto dir = std::filesystem::path("suite_empty_out");
  std::filesystem::remove_all(dir);
  const auto result = run_experiment_suite(
      io::parse_json(R"({"sweeps": []})", "test"), dir.string());
  CHECK(result.trace_files.empty());
  CHECK(std::filesystem::exists(result.summary_file));
}

TEST_CASE("a small sweep writes traces, sidecars and a summary", "[experiments]") {
  const auto dir = std::filesystem::path("suite_small_out");
  std::filesystem::remove_all(dir);
  const io::json config = io::parse_json(R"({
    "sweeps": [{
      "name": "quad",
      "strategies": ["ideal", "cogc_d1"],
      "seeds": [1, 2],
      "network": {"M": 6, "p_c2c": 0.1, "p_up": 0.1},
      "train": {"M": 6, "s": 2, "T": 25, "I": 1, "eta": 0.1,
                 "family": "quadratic", "dim": 3, "skew": 1.0}
    }]
  })", "test");
  const auto result = run_experiment_suite(config, dir.string());
  CHECK(result.trace_files.size() == 4);

  int csv_count = 0, sidecar_count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (name.ends_with(".config.json")) ++sidecar_count;
    else if (name.ends_with(".csv")) ++csv_count;
  }
  CHECK(csv_count == 4);
  CHECK(sidecar_count == 4);

  const auto summary = io::parse_json(io::read_text_file(result.summary_file), "summary");
  CHECK(summary.at("runs").size() == 4);
  CHECK(summary.contains("config_hash"));

  // guaranteed-recovery training follows the ideal trajectory seed by seed
  for (std::uint64_t seed : {1, 2}) {
    double ideal_loss = -1.0, coded_loss = -2.0;
    for (const auto& run : summary.at("runs")) {
      if (run.at("seed") != seed) continue;
      if (run.at("strategy") == "ideal") ideal_loss = run.at("final_loss").get<double>();
      if (run.at("strategy") == "cogc_d1") coded_loss = run.at("final_loss").get<double>();
    }
    CHECK_THAT(coded_loss, Catch::Matchers::WithinAbs(ideal_loss, 1e-9));
  }
}

TEST_CASE("identical seed and config give bitwise-identical files", "[experiments]") {
  const io::json config = io::parse_json(R"({
    "sweeps": [{
      "name": "rep",
      "strategies": ["cogc_d2"],
      "seeds": [9],
      "network": {"M": 5, "p_c2c": 0.2, "p_up": 0.4},
      "train": {"M": 5, "s": 2, "T": 15, "I": 2, "eta": 0.1,
                 "family": "quadratic", "dim": 3, "skew": 1.0, "retry_cap": 2000}
    }]
  })", "test");
  const auto dir_a = std::filesystem::path("suite_rep_a");
  const auto dir_b = std::filesystem::path("suite_rep_b");
  std::filesystem::remove_all(dir_a);
  std::filesystem::remove_all(dir_b);
  run_experiment_suite(config, dir_a.string());
  run_experiment_suite(config, dir_b.string());
  for (const auto& entry : std::filesystem::directory_iterator(dir_a)) {
    const auto name = entry.path().filename();
    CHECK(io::read_text_file((dir_a / name).string()) ==
          io::read_text_file((dir_b / name).string()));
  }
}
