#pragma once

#include <cstdint>
#include <vector>

#include "cogc/code.hpp"
#include "cogc/errors.hpp"
#include "cogc/linalg.hpp"
#include "cogc/rng.hpp"

// Intermittent network model: every client-to-client link and every
// client-to-server uplink is an independent Bernoulli erasure. Downlink
// broadcasting is error-free.

namespace cogc {

struct NetworkModel {
  Matrix outage_c2c;  // p(m,k): probability the link from client k to client m drops
  Vector outage_up;   // p(m): probability the uplink of client m drops

  int num_clients() const { return static_cast<int>(outage_up.size()); }

  void validate() const {
    const int m_count = num_clients();
    require(m_count >= 1, ErrorCode::invalid_params, "network: at least one client required");
    require(outage_c2c.rows() == m_count && outage_c2c.cols() == m_count,
            ErrorCode::invalid_params, "network: p_c2c must be M x M");
    require((outage_c2c.array() >= 0.0).all() && (outage_c2c.array() <= 1.0).all(),
            ErrorCode::invalid_params, "network: p_c2c entries must lie in [0,1]");
    require((outage_up.array() >= 0.0).all() && (outage_up.array() <= 1.0).all(),
            ErrorCode::invalid_params, "network: p_up entries must lie in [0,1]");
    for (int m = 0; m < m_count; ++m)
      require(outage_c2c(m, m) == 0.0, ErrorCode::invalid_params,
              "network: p_c2c diagonal must be zero");
  }

  static NetworkModel uniform(int num_clients, double p_c2c, double p_up) {
    NetworkModel net;
    net.outage_c2c = Matrix::Constant(num_clients, num_clients, p_c2c);
    net.outage_c2c.diagonal().setZero();
    net.outage_up = Vector::Constant(num_clients, p_up);
    net.validate();
    return net;
  }
};

struct RoundConnectivity {
  IntMatrix links;    // tau(m,k); diagonal forced to 1 (no self transmission)
  IntVector uplinks;  // tau(m)
};

// Address of one communication attempt; any attempt is reproducible in
// isolation from (seed, round, attempt).
struct DrawKey {
  std::uint64_t seed = 0;
  std::uint64_t round = 0;
  std::uint64_t attempt = 0;
};

inline RoundConnectivity draw_round(const NetworkModel& net, const DrawKey& key) {
  net.validate();
  const int m_count = net.num_clients();
  RoundConnectivity conn;
  conn.links = IntMatrix::Ones(m_count, m_count);
  conn.uplinks = IntVector::Zero(m_count);
  for (int m = 0; m < m_count; ++m) {
    for (int k = 0; k < m_count; ++k) {
      if (m == k) continue;
      const auto link_id = static_cast<std::uint64_t>(m) * static_cast<std::uint64_t>(m_count) +
                           static_cast<std::uint64_t>(k);
      conn.links(m, k) = rng::bernoulli_up(net.outage_c2c(m, k), key.seed, rng::kLinks,
                                           key.round, key.attempt, link_id);
    }
    const auto up_id = static_cast<std::uint64_t>(m_count) * static_cast<std::uint64_t>(m_count) +
                       static_cast<std::uint64_t>(m);
    conn.uplinks(m) = rng::bernoulli_up(net.outage_up(m), key.seed, rng::kLinks, key.round,
                                        key.attempt, up_id);
  }
  return conn;
}

struct NeighborSets {
  std::vector<int> recipients;  // clients that hear this client's gradient
  std::vector<int> senders;     // clients this client hears from
};

inline NeighborSets neighbor_sets(const CyclicCode& code, int client) {
  const int m_count = code.num_clients;
  require(client >= 0 && client < m_count, ErrorCode::invalid_input,
          "neighbor_sets: client out of range");
  NeighborSets sets;
  for (int j = 1; j <= code.straggler_tolerance; ++j) {
    sets.senders.push_back((client + j) % m_count);
    sets.recipients.push_back(((client - j) % m_count + m_count) % m_count);
  }
  std::sort(sets.senders.begin(), sets.senders.end());
  std::sort(sets.recipients.begin(), sets.recipients.end());
  return sets;
}

}  // namespace cogc
