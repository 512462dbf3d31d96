#include "fsdt/fed/federation.hpp"

#include <map>
#include <stdexcept>

#include "fsdt/dt/batch.hpp"
#include "fsdt/fed/fedavg.hpp"

namespace fsdt::fed {

namespace {

// One optimization step of the given parameter groups on one sampled batch.
double train_step(dt::SplitDtModel<float>& model,
                  const data::OfflineDataset& ds, int batch_size,
                  std::mt19937_64& batch_rng, const nn::AdamwConfig& opt,
                  const std::vector<nn::ParamSet<float>*>& step_sets) {
  dt::ContextBatch<float> batch = dt::sample_batch<float>(
      ds, batch_size, model.config().context_length, batch_rng);
  model.zero_grads();
  const double loss = model.loss_and_backward(batch, /*train=*/true);
  for (auto* ps : step_sets) nn::adamw_step(*ps, opt);
  return loss;
}

void check_clients(const FedConfig& cfg, const std::vector<ClientData>& cs) {
  if (cs.empty()) throw std::invalid_argument("no clients");
  for (const auto& c : cs) {
    if (c.train.empty())
      throw std::invalid_argument("client " + c.name + " has no data");
    if (c.train.state_dim != cfg.dt.state_dim ||
        c.train.action_dim != cfg.dt.action_dim)
      throw std::invalid_argument("client " + c.name + " dims mismatch model");
  }
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------
// FSDT

FsdtTrainer::FsdtTrainer(FedConfig cfg, std::vector<ClientData> clients)
    : cfg_(std::move(cfg)),
      clients_(std::move(clients)),
      server_batch_rng_(mix_seed(cfg_.seed, 999)) {
  check_clients(cfg_, clients_);
  // identical initialization everywhere: every client starts from the same
  // global weights and the server decoder matches the copies handed out
  for (std::size_t i = 0; i < clients_.size(); ++i) {
    models_.push_back(
        std::make_unique<dt::SplitDtModel<float>>(cfg_.dt, cfg_.seed));
    models_[i]->seed_dropout(mix_seed(cfg_.seed, 100 + i));
    batch_rngs_.emplace_back(mix_seed(cfg_.seed, 200 + i));
  }
  server_ = std::make_unique<dt::SplitDtModel<float>>(cfg_.dt, cfg_.seed);
  server_->seed_dropout(mix_seed(cfg_.seed, 300));

  std::map<std::string, std::size_t> domain_index;
  for (std::size_t i = 0; i < clients_.size(); ++i) {
    auto [it, fresh] =
        domain_index.try_emplace(clients_[i].domain, domain_groups_.size());
    if (fresh) domain_groups_.emplace_back();
    domain_groups_[it->second].push_back(i);
  }

  split_floats_ = static_cast<std::uint64_t>(cfg_.batch_size) * 3ull *
                  cfg_.dt.context_length * cfg_.dt.hidden_dim;
}

void FsdtTrainer::sync_decoder_to_clients() {
  for (auto& m : models_)
    nn::copy_values(m->decoder_params(), server_->decoder_params());
}

void FsdtTrainer::begin_round() { sync_decoder_to_clients(); }

void FsdtTrainer::phase1() {
  for (std::size_t i = 0; i < clients_.size(); ++i) {
    double sum = 0.0;
    std::vector<nn::ParamSet<float>*> sets{&models_[i]->embed_params(),
                                           &models_[i]->predict_params()};
    for (int s = 0; s < cfg_.client_steps; ++s)
      sum += train_step(*models_[i], clients_[i].train, cfg_.batch_size,
                        batch_rngs_[i], cfg_.opt, sets);
    if (cfg_.client_steps > 0)
      history_.push_back(
          {round_, clients_[i].name, 1, sum / cfg_.client_steps});
    CommEntry e;
    e.acts_up = split_floats_ * cfg_.client_steps;
    e.grads_down = split_floats_ * cfg_.client_steps;
    comm_.add(round_, clients_[i].name, e);
  }
}

void FsdtTrainer::aggregate() {
  const std::uint64_t p_edge = models_[0]->embed_params().count().params +
                               models_[0]->predict_params().count().params;
  for (const auto& group : domain_groups_) {
    std::vector<const nn::ParamSet<float>*> embeds, predicts;
    for (std::size_t i : group) {
      embeds.push_back(&models_[i]->embed_params());
      predicts.push_back(&models_[i]->predict_params());
    }
    fedavg(models_[group[0]]->embed_params(), embeds);
    fedavg(models_[group[0]]->predict_params(), predicts);
    for (std::size_t j = 1; j < group.size(); ++j) {
      nn::copy_values(models_[group[j]]->embed_params(),
                      models_[group[0]]->embed_params());
      nn::copy_values(models_[group[j]]->predict_params(),
                      models_[group[0]]->predict_params());
    }
    for (std::size_t i : group) {
      CommEntry e;
      e.params_up = p_edge;
      e.params_down = p_edge;
      comm_.add(round_, clients_[i].name, e);
    }
  }
}

void FsdtTrainer::phase2() {
  // one pass over the clients in declaration order, the step budget split
  // evenly (remainder to the earliest clients)
  std::vector<nn::ParamSet<float>*> sets{&server_->decoder_params()};
  const int n = static_cast<int>(clients_.size());
  const int per = cfg_.server_steps / n;
  const int rem = cfg_.server_steps % n;
  for (int c = 0; c < n; ++c) {
    const int steps = per + (c < rem ? 1 : 0);
    if (steps == 0) continue;
    // the client's frozen locals run on the server model for these batches;
    // on the wire this is the same split-point activation exchange
    nn::copy_values(server_->embed_params(), models_[c]->embed_params());
    nn::copy_values(server_->predict_params(), models_[c]->predict_params());
    double sum = 0.0;
    for (int s = 0; s < steps; ++s)
      sum += train_step(*server_, clients_[c].train, cfg_.batch_size,
                        server_batch_rng_, cfg_.opt, sets);
    history_.push_back({round_, clients_[c].name, 2, sum / steps});
    CommEntry e;
    e.acts_up = split_floats_ * steps;
    e.grads_down = split_floats_ * steps;
    comm_.add(round_, clients_[c].name, e);
  }
}

void FsdtTrainer::end_round() { ++round_; }

void FsdtTrainer::run_round() {
  begin_round();
  phase1();
  aggregate();
  phase2();
  end_round();
}

void FsdtTrainer::run() {
  while (round_ < cfg_.rounds) run_round();
  sync_decoder_to_clients();
}

// ---------------------------------------------------------------------------
// F-DT baseline

FdtTrainer::FdtTrainer(FedConfig cfg, std::vector<ClientData> clients)
    : cfg_(std::move(cfg)), clients_(std::move(clients)) {
  check_clients(cfg_, clients_);
  for (std::size_t i = 0; i < clients_.size(); ++i) {
    models_.push_back(
        std::make_unique<dt::SplitDtModel<float>>(cfg_.dt, cfg_.seed));
    models_[i]->seed_dropout(mix_seed(cfg_.seed, 100 + i));
    batch_rngs_.emplace_back(mix_seed(cfg_.seed, 200 + i));
  }
  global_ = std::make_unique<dt::SplitDtModel<float>>(cfg_.dt, cfg_.seed);
}

int FdtTrainer::local_steps_per_round() const {
  // fair-comparison rule: every algorithm gets the same aggregate budget of
  // rounds * (client_steps + server_steps) gradient steps
  return (cfg_.client_steps + cfg_.server_steps) /
         static_cast<int>(clients_.size());
}

void FdtTrainer::run_round() {
  const std::uint64_t p_total = global_->embed_params().count().params +
                                global_->decoder_params().count().params +
                                global_->predict_params().count().params;
  const int steps = local_steps_per_round();
  for (std::size_t i = 0; i < clients_.size(); ++i) {
    nn::copy_values(models_[i]->embed_params(), global_->embed_params());
    nn::copy_values(models_[i]->decoder_params(), global_->decoder_params());
    nn::copy_values(models_[i]->predict_params(), global_->predict_params());
    std::vector<nn::ParamSet<float>*> sets{&models_[i]->embed_params(),
                                           &models_[i]->decoder_params(),
                                           &models_[i]->predict_params()};
    double sum = 0.0;
    for (int s = 0; s < steps; ++s)
      sum += train_step(*models_[i], clients_[i].train, cfg_.batch_size,
                        batch_rngs_[i], cfg_.opt, sets);
    if (steps > 0)
      history_.push_back({round_, clients_[i].name, 1, sum / steps});
    CommEntry e;
    e.params_down = p_total;
    e.params_up = p_total;
    comm_.add(round_, clients_[i].name, e);
  }
  std::vector<const nn::ParamSet<float>*> es, ds, ps;
  for (auto& m : models_) {
    es.push_back(&m->embed_params());
    ds.push_back(&m->decoder_params());
    ps.push_back(&m->predict_params());
  }
  fedavg(global_->embed_params(), es);
  fedavg(global_->decoder_params(), ds);
  fedavg(global_->predict_params(), ps);
  ++round_;
}

void FdtTrainer::run() {
  while (round_ < cfg_.rounds) run_round();
}

// ---------------------------------------------------------------------------
// C-DT baseline

CdtTrainer::CdtTrainer(FedConfig cfg, data::OfflineDataset train,
                       int steps_per_round)
    : cfg_(std::move(cfg)),
      train_(std::move(train)),
      steps_per_round_(steps_per_round),
      batch_rng_(mix_seed(cfg_.seed, 200)) {
  if (train_.empty()) throw std::invalid_argument("empty training dataset");
  model_ = std::make_unique<dt::SplitDtModel<float>>(cfg_.dt, cfg_.seed);
  model_->seed_dropout(mix_seed(cfg_.seed, 100));
}

void CdtTrainer::run_round() {
  std::vector<nn::ParamSet<float>*> sets{&model_->embed_params(),
                                         &model_->decoder_params(),
                                         &model_->predict_params()};
  double sum = 0.0;
  for (int s = 0; s < steps_per_round_; ++s)
    sum += train_step(*model_, train_, cfg_.batch_size, batch_rng_, cfg_.opt,
                      sets);
  if (steps_per_round_ > 0)
    history_.push_back({round_, "central", 1, sum / steps_per_round_});
  ++round_;
}

void CdtTrainer::run() {
  while (round_ < cfg_.rounds) run_round();
}

}  // namespace fsdt::fed
