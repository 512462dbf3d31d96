#pragma once
// Communication accounting for the training algorithms. Counts are in
// 32-bit float units; bytes = 4 * floats.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace fsdt::fed {

struct CommEntry {
  std::uint64_t params_up = 0;     // client -> server parameter floats
  std::uint64_t params_down = 0;   // server -> client parameter floats
  std::uint64_t acts_up = 0;       // split-point activations, client -> server
  std::uint64_t grads_down = 0;    // split-point gradients, server -> client

  std::uint64_t total() const {
    return params_up + params_down + acts_up + grads_down;
  }
  CommEntry& operator+=(const CommEntry& o) {
    params_up += o.params_up;
    params_down += o.params_down;
    acts_up += o.acts_up;
    grads_down += o.grads_down;
    return *this;
  }
};

// Per-(round, client) communication ledger populated by the trainers.
class CommLedger {
 public:
  void add(int round, const std::string& client, const CommEntry& e);

  CommEntry client_total(const std::string& client) const;
  CommEntry round_total(int round) const;
  CommEntry grand_total() const;

  nlohmann::ordered_json to_json() const;

 private:
  struct Row {
    int round;
    std::string client;
    CommEntry entry;
  };
  std::vector<Row> rows_;
};

// Analytic costs (floats). Federated learning of the full model exchanges
// the whole parameter vector up and down every round:
//   T_FL = 2 * rounds * p_total        (per client)
std::uint64_t fl_comm_floats(int rounds, std::uint64_t p_total);

// Split training exchanges activations and their gradients at the
// edge/cloud cut for every batch crossing it, plus the edge-side parameters
// for aggregation. Per round a client contributes client_steps batches in
// phase 1 and its round-robin share of server_steps batches in phase 2;
// each batch moves batch*3*context_len*hidden floats in each direction.
std::uint64_t fsdt_comm_floats_per_client(int rounds, int n_clients,
                                          int client_steps, int server_steps,
                                          int batch, int context_len,
                                          int hidden, std::uint64_t p_edge);
// Aggregate over all clients (exact, independent of round-robin remainders).
std::uint64_t fsdt_comm_floats_total(int rounds, int n_clients,
                                     int client_steps, int server_steps,
                                     int batch, int context_len, int hidden,
                                     std::uint64_t p_edge);

}  // namespace fsdt::fed
