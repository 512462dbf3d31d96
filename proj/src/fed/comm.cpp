#include "fsdt/fed/comm.hpp"

namespace fsdt::fed {

void CommLedger::add(int round, const std::string& client,
                     const CommEntry& e) {
  rows_.push_back({round, client, e});
}

CommEntry CommLedger::client_total(const std::string& client) const {
  CommEntry t;
  for (const auto& r : rows_)
    if (r.client == client) t += r.entry;
  return t;
}

CommEntry CommLedger::round_total(int round) const {
  CommEntry t;
  for (const auto& r : rows_)
    if (r.round == round) t += r.entry;
  return t;
}

CommEntry CommLedger::grand_total() const {
  CommEntry t;
  for (const auto& r : rows_) t += r.entry;
  return t;
}

nlohmann::ordered_json CommLedger::to_json() const {
  nlohmann::ordered_json rounds = nlohmann::ordered_json::array();
  for (const auto& r : rows_) {
    rounds.push_back({{"round", r.round},
                      {"client", r.client},
                      {"params_up", r.entry.params_up},
                      {"params_down", r.entry.params_down},
                      {"acts_up", r.entry.acts_up},
                      {"grads_down", r.entry.grads_down},
                      {"total", r.entry.total()}});
  }
  const CommEntry g = grand_total();
  return nlohmann::ordered_json{
      {"unit", "float32"},
      {"rows", rounds},
      {"grand_total_floats", g.total()},
      {"grand_total_bytes", g.total() * 4}};
}

std::uint64_t fl_comm_floats(int rounds, std::uint64_t p_total) {
  return 2ull * static_cast<std::uint64_t>(rounds) * p_total;
}

namespace {
std::uint64_t split_floats_per_batch(int batch, int context_len, int hidden) {
  return static_cast<std::uint64_t>(batch) * 3ull * context_len * hidden;
}
}  // namespace

std::uint64_t fsdt_comm_floats_per_client(int rounds, int n_clients,
                                          int client_steps, int server_steps,
                                          int batch, int context_len,
                                          int hidden, std::uint64_t p_edge) {
  const std::uint64_t fg = 2ull * split_floats_per_batch(batch, context_len, hidden);
  const std::uint64_t batches =
      static_cast<std::uint64_t>(client_steps) +
      static_cast<std::uint64_t>(server_steps) / n_clients;
  return static_cast<std::uint64_t>(rounds) * (batches * fg + 2ull * p_edge);
}

std::uint64_t fsdt_comm_floats_total(int rounds, int n_clients,
                                     int client_steps, int server_steps,
                                     int batch, int context_len, int hidden,
                                     std::uint64_t p_edge) {
  const std::uint64_t fg = 2ull * split_floats_per_batch(batch, context_len, hidden);
  const std::uint64_t batches =
      static_cast<std::uint64_t>(n_clients) * client_steps + server_steps;
  return static_cast<std::uint64_t>(rounds) *
         (batches * fg + 2ull * n_clients * p_edge);
}

}  // namespace fsdt::fed
