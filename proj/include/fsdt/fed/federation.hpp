#pragma once
// Two-phase federated split training plus the centralized and full-model
// federated baselines. All three trainers consume the same offline datasets
// and share the per-step training kernel, so differences between algorithms
// come only from what is exchanged and when.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "fsdt/data/dataset.hpp"
#include "fsdt/dt/config.hpp"
#include "fsdt/dt/model.hpp"
#include "fsdt/fed/comm.hpp"
#include "fsdt/nn/param_set.hpp"

namespace fsdt::fed {

struct FedConfig {
  dt::DtConfig dt;
  int rounds = 20;
  int client_steps = 100;  // local steps per client per round (phase 1)
  int server_steps = 100;  // decoder steps per round (phase 2)
  int batch_size = 64;
  nn::AdamwConfig opt;
  std::uint64_t seed = 1;
};

struct ClientData {
  std::string name;    // e.g. "umb-umi"
  std::string domain;  // aggregation group, e.g. "umb"
  data::OfflineDataset train;
};

struct LossRecord {
  int round = 0;
  std::string client;
  int phase = 0;  // 1 = local/client update, 2 = server/decoder update
  double mean_loss = 0.0;
};

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

// Algorithm: per round, every client updates its local (embedding +
// prediction) parameters against the frozen shared decoder; locals are then
// federated-averaged within each domain; finally the server updates the
// decoder on client batches with the locals frozen. Only split-point
// activations/gradients and the local parameters ever cross the network.
class FsdtTrainer {
 public:
  FsdtTrainer(FedConfig cfg, std::vector<ClientData> clients);

  void run();  // all remaining rounds, then decoder sync for evaluation
  void run_round();

  // round sub-steps, exposed so tests can assert the freeze contracts
  void begin_round();  // push current decoder to every client
  void phase1();
  void aggregate();
  void phase2();
  void end_round();
  void sync_decoder_to_clients();

  int rounds_done() const { return round_; }
  std::size_t n_clients() const { return clients_.size(); }
  const ClientData& client(std::size_t i) const { return clients_[i]; }
  dt::SplitDtModel<float>& client_model(std::size_t i) { return *models_[i]; }
  dt::SplitDtModel<float>& server_model() { return *server_; }
  const CommLedger& comm() const { return comm_; }
  const std::vector<LossRecord>& history() const { return history_; }

 private:
  FedConfig cfg_;
  std::vector<ClientData> clients_;
  std::vector<std::unique_ptr<dt::SplitDtModel<float>>> models_;
  std::unique_ptr<dt::SplitDtModel<float>> server_;
  std::vector<std::mt19937_64> batch_rngs_;
  std::mt19937_64 server_batch_rng_;
  std::vector<std::vector<std::size_t>> domain_groups_;
  CommLedger comm_;
  std::vector<LossRecord> history_;
  int round_ = 0;
  std::uint64_t split_floats_ = 0;  // activations per batch at the cut
};

// Full-model FedAvg baseline: every client trains the whole model locally
// and exchanges all parameters each round.
class FdtTrainer {
 public:
  FdtTrainer(FedConfig cfg, std::vector<ClientData> clients);

  void run();
  void run_round();

  int rounds_done() const { return round_; }
  std::size_t n_clients() const { return clients_.size(); }
  const ClientData& client(std::size_t i) const { return clients_[i]; }
  dt::SplitDtModel<float>& global_model() { return *global_; }
  dt::SplitDtModel<float>& client_model(std::size_t i) { return *models_[i]; }
  const CommLedger& comm() const { return comm_; }
  const std::vector<LossRecord>& history() const { return history_; }
  int local_steps_per_round() const;

 private:
  FedConfig cfg_;
  std::vector<ClientData> clients_;
  std::vector<std::unique_ptr<dt::SplitDtModel<float>>> models_;
  std::unique_ptr<dt::SplitDtModel<float>> global_;
  std::vector<std::mt19937_64> batch_rngs_;
  CommLedger comm_;
  std::vector<LossRecord> history_;
  int round_ = 0;
};

// Centralized baseline: one model, one merged dataset, no communication.
// With a single client and steps_per_round = client_steps + server_steps it
// reproduces FdtTrainer bit-for-bit (FedAvg over one client is the identity).
class CdtTrainer {
 public:
  CdtTrainer(FedConfig cfg, data::OfflineDataset train, int steps_per_round);

  void run();
  void run_round();

  int rounds_done() const { return round_; }
  dt::SplitDtModel<float>& model() { return *model_; }
  const std::vector<LossRecord>& history() const { return history_; }

 private:
  FedConfig cfg_;
  data::OfflineDataset train_;
  int steps_per_round_;
  std::unique_ptr<dt::SplitDtModel<float>> model_;
  std::mt19937_64 batch_rng_;
  std::vector<LossRecord> history_;
  int round_ = 0;
};

}  // namespace fsdt::fed
