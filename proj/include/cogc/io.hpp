#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cogc/analysis.hpp"
#include "cogc/channel.hpp"
#include "cogc/code.hpp"
#include "cogc/errors.hpp"
#include "cogc/protocol.hpp"
#include "cogc/training.hpp"

// File formats. Client indices in exported JSON/CSV are 1-based to match the
// conventional notation used on the command line; everything in-memory is
// 0-based.

namespace cogc::io {

using nlohmann::json;

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::vector<double> row_major(const Matrix& m) {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) flat.push_back(m(i, j));
  return flat;
}

inline Matrix from_row_major(const std::vector<double>& flat, Eigen::Index rows,
                             Eigen::Index cols) {
  require(static_cast<Eigen::Index>(flat.size()) == rows * cols, ErrorCode::invalid_input,
          "matrix payload has wrong length");
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      m(i, j) = flat[static_cast<std::size_t>(i * cols + j)];
  return m;
}

inline std::vector<int> one_based(const std::vector<int>& ids) {
  std::vector<int> out;
  out.reserve(ids.size());
  for (int id : ids) out.push_back(id + 1);
  return out;
}

// ---- cyclic codes ----------------------------------------------------------

inline json code_to_json(const CyclicCode& code) {
  return json{{"M", code.num_clients},
              {"s", code.straggler_tolerance},
              {"seed", code.seed},
              {"B", row_major(code.coeffs)},
              {"H", row_major(code.parity)}};
}

inline CyclicCode code_from_json(const json& j) {
  CyclicCode code;
  code.num_clients = j.at("M").get<int>();
  code.straggler_tolerance = j.at("s").get<int>();
  code.seed = j.at("seed").get<std::uint64_t>();
  code.coeffs = from_row_major(j.at("B").get<std::vector<double>>(), code.num_clients,
                               code.num_clients);
  code.parity = from_row_major(j.at("H").get<std::vector<double>>(), code.straggler_tolerance,
                               code.num_clients);
  return code;
}

// ---- networks --------------------------------------------------------------
//
// {"M": 10, "p_c2c": 0.4, "p_up": 0.0}          uniform shorthands
// {"M": 3, "p_c2c": [...], "p_up": [...]}       per-client (p_c2c row value)
// {"M": 3, "p_c2c": [[...], ...], "p_up": [..]} full matrix

inline NetworkModel network_from_json(const json& j) {
  const int m_count = j.at("M").get<int>();
  require(m_count >= 1, ErrorCode::invalid_params, "network: M must be >= 1");
  NetworkModel net;
  net.outage_c2c = Matrix::Zero(m_count, m_count);
  net.outage_up = Vector::Zero(m_count);

  const json c2c = j.value("p_c2c", json(0.0));
  if (c2c.is_number()) {
    net.outage_c2c.setConstant(c2c.get<double>());
  } else if (c2c.is_array() && !c2c.empty() && c2c.front().is_array()) {
    require(static_cast<int>(c2c.size()) == m_count, ErrorCode::invalid_params,
            "network: p_c2c matrix must have M rows");
    for (int m = 0; m < m_count; ++m) {
      require(static_cast<int>(c2c[m].size()) == m_count, ErrorCode::invalid_params,
              "network: p_c2c matrix must have M columns");
      for (int k = 0; k < m_count; ++k) net.outage_c2c(m, k) = c2c[m][k].get<double>();
    }
  } else if (c2c.is_array()) {
    require(static_cast<int>(c2c.size()) == m_count, ErrorCode::invalid_params,
            "network: p_c2c vector must have length M");
    for (int m = 0; m < m_count; ++m) net.outage_c2c.row(m).setConstant(c2c[m].get<double>());
  } else {
    fail(ErrorCode::invalid_params, "network: p_c2c must be a number, vector or matrix");
  }
  net.outage_c2c.diagonal().setZero();

  const json up = j.value("p_up", json(0.0));
  if (up.is_number()) {
    net.outage_up.setConstant(up.get<double>());
  } else if (up.is_array()) {
    require(static_cast<int>(up.size()) == m_count, ErrorCode::invalid_params,
            "network: p_up vector must have length M");
    for (int m = 0; m < m_count; ++m) net.outage_up(m) = up[m].get<double>();
  } else {
    fail(ErrorCode::invalid_params, "network: p_up must be a number or vector");
  }
  net.validate();
  return net;
}

inline json network_to_json(const NetworkModel& net) {
  json rows = json::array();
  for (int m = 0; m < net.num_clients(); ++m) {
    json row = json::array();
    for (int k = 0; k < net.num_clients(); ++k) row.push_back(net.outage_c2c(m, k));
    rows.push_back(row);
  }
  json up = json::array();
  for (int m = 0; m < net.num_clients(); ++m) up.push_back(net.outage_up(m));
  return json{{"M", net.num_clients()}, {"p_c2c", rows}, {"p_up", up}};
}

// ---- file helpers ----------------------------------------------------------

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  const auto parent = std::filesystem::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io_error, "cannot write " + path);
  out << content;
  if (!out) fail(ErrorCode::io_error, "write failed for " + path);
}

inline json parse_json(const std::string& text, const std::string& what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) fail(ErrorCode::io_error, "malformed JSON in " + what);
  return j;
}

inline NetworkModel load_network_file(const std::string& path) {
  return network_from_json(parse_json(read_text_file(path), path));
}

// ---- transcripts -----------------------------------------------------------

inline json transcript_to_json(int attempt, const RoundTranscript& transcript,
                               const DecodeOutcome* outcome = nullptr) {
  const auto& conn = transcript.connectivity;
  json links = json::array();
  for (Eigen::Index m = 0; m < conn.links.rows(); ++m) {
    json row = json::array();
    for (Eigen::Index k = 0; k < conn.links.cols(); ++k) row.push_back(conn.links(m, k));
    links.push_back(row);
  }
  json tau = json::array();
  for (Eigen::Index m = 0; m < conn.uplinks.size(); ++m) tau.push_back(conn.uplinks(m));
  json out{{"attempt", attempt},
           {"T", links},
           {"tau", tau},
           {"b_hat", row_major(transcript.coeffs_received)},
           {"K3", one_based(transcript.complete_owners)}};
  if (outcome) {
    out["outcome"] = to_string(outcome->kind);
    out["K4"] = one_based(outcome->decoded);
  }
  return out;
}

// ---- analysis reports ------------------------------------------------------

inline json breakdown_to_json(int s, const OutageBreakdown& b) {
  json p11 = json::array();
  for (Eigen::Index m = 0; m < b.p11.size(); ++m) p11.push_back(b.p11(m));
  json out{{"s", s},       {"P1", b.p1},   {"P2", b.p2},           {"P3", b.p3},
           {"P_O", b.p_o}, {"P11", p11},   {"P21", b.p21},         {"P22", b.p22},
           {"prod_P11", b.prod_p11}};
  if (b.p_o < 1.0) out["E_retries"] = expected_retries(b.p_o);
  const int m_count = static_cast<int>(b.p11.size());
  out["tx_max"] = transmissions_per_round(m_count, s, m_count);
  return out;
}

inline std::string breakdown_to_text(int s, const OutageBreakdown& b) {
  const int m_count = static_cast<int>(b.p11.size());
  std::ostringstream out;
  out << "s         " << s << "\n";
  out << "P1        " << format_double(b.p1) << "\n";
  out << "P2        " << format_double(b.p2) << "\n";
  out << "P3        " << format_double(b.p3) << "\n";
  out << "P_O       " << format_double(b.p_o) << "\n";
  out << "prod_P11  " << format_double(b.prod_p11) << "\n";
  out << "P21       " << format_double(b.p21) << "\n";
  out << "P22       " << format_double(b.p22) << "\n";
  if (b.p_o < 1.0) out << "E_retries " << format_double(expected_retries(b.p_o)) << "\n";
  out << "tx_max    " << transmissions_per_round(m_count, s, m_count) << "\n";
  return out.str();
}

inline std::string breakdown_to_csv(int s, const OutageBreakdown& b) {
  const int m_count = static_cast<int>(b.p11.size());
  std::ostringstream out;
  out << "s,P1,P2,P3,P_O,prod_P11,P21,P22,E_retries,tx_max\n";
  out << s << ',' << format_double(b.p1) << ',' << format_double(b.p2) << ','
      << format_double(b.p3) << ',' << format_double(b.p_o) << ','
      << format_double(b.prod_p11) << ',' << format_double(b.p21) << ','
      << format_double(b.p22) << ',';
  out << (b.p_o < 1.0 ? format_double(expected_retries(b.p_o)) : "inf");
  out << ',' << transmissions_per_round(m_count, s, m_count) << "\n";
  return out.str();
}

// ---- training traces -------------------------------------------------------

inline std::string trace_to_csv(const TrainingTrace& trace, Strategy strategy) {
  std::ostringstream out;
  out << "round,strategy,loss,grad_norm,accuracy,outcome,K4_size,retries,tx_cumulative\n";
  for (const auto& r : trace.rounds) {
    out << r.round << ',' << to_string(strategy) << ',' << format_double(r.loss) << ','
        << format_double(r.grad_norm) << ',';
    if (r.accuracy) out << format_double(*r.accuracy);
    out << ',' << r.outcome << ',' << r.aggregated << ',' << r.attempts << ','
        << r.tx_cumulative << "\n";
  }
  return out.str();
}

inline json train_config_to_json(const TrainConfig& config) {
  return json{{"strategy", to_string(config.strategy)},
              {"M", config.num_clients},
              {"I", config.local_steps},
              {"T", config.rounds},
              {"eta", config.learning_rate},
              {"t_r", config.stack_attempts},
              {"s", config.straggler_tolerance},
              {"batch", config.batch_size},
              {"seed", config.seed},
              {"retry_cap", config.retry_cap},
              {"plus_mode", config.plus_mode == DecodeMode::kExact ? "exact" : "paper_approx"},
              {"family", to_string(config.data.family)},
              {"dim", config.data.dim},
              {"classes", config.data.classes},
              {"samples_per_client", config.data.samples_per_client},
              {"skew", config.data.skew}};
}

inline std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hash_hex(const std::string& text) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(text)));
  return buf;
}

}  // namespace cogc::io
