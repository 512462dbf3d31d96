#include "fsdt/harness/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <set>

#include "fsdt/data/policies.hpp"
#include "fsdt/dt/rollout.hpp"
#include "fsdt/harness/stats.hpp"
#include "fsdt/nn/checkpoint.hpp"

namespace fsdt::harness {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr const char* kAlgos[] = {"fsdt", "cdt", "fdt"};

bool known_algo(const std::string& a) {
  return std::find(std::begin(kAlgos), std::end(kAlgos), a) != std::end(kAlgos);
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for write: " + path.string());
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

void write_json(const fs::path& path, const ordered_json& j) {
  write_text(path, j.dump(2) + "\n");
}

json read_json(const fs::path& path, const char* hint) {
  std::ifstream f(path);
  if (!f)
    throw GuardError("missing " + path.string() + " — " + hint);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw GuardError("cannot parse " + path.string() + ": " + e.what());
  }
  return j;
}

std::string format_loss(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string loss_csv(const std::vector<fed::LossRecord>& history) {
  std::string csv = "round,client,phase,loss\n";
  for (const auto& r : history)
    csv += std::to_string(r.round) + "," + r.client + "," +
           std::to_string(r.phase) + "," + format_loss(r.mean_loss) + "\n";
  return csv;
}

ordered_json analytic_comm(const RunConfig& cfg) {
  const SplitCounts c = split_param_counts(cfg.fed.dt);
  const std::uint64_t p_edge = c.embed + c.predict;
  const std::uint64_t split_floats =
      static_cast<std::uint64_t>(cfg.fed.batch_size) * 3ull *
      cfg.fed.dt.context_length * cfg.fed.dt.hidden_dim;
  const int n = static_cast<int>(cfg.clients.size());
  return ordered_json{
      {"rounds", cfg.fed.rounds},
      {"p_total", c.total()},
      {"p_edge", p_edge},
      {"split_floats_per_batch", split_floats},
      {"t_fl_per_client", fed::fl_comm_floats(cfg.fed.rounds, c.total())},
      {"t_fsdt_per_client",
       fed::fsdt_comm_floats_per_client(cfg.fed.rounds, n, cfg.fed.client_steps,
                                        cfg.fed.server_steps,
                                        cfg.fed.batch_size,
                                        cfg.fed.dt.context_length,
                                        cfg.fed.dt.hidden_dim, p_edge)},
      {"t_fsdt_total",
       fed::fsdt_comm_floats_total(cfg.fed.rounds, n, cfg.fed.client_steps,
                                   cfg.fed.server_steps, cfg.fed.batch_size,
                                   cfg.fed.dt.context_length,
                                   cfg.fed.dt.hidden_dim, p_edge)}};
}

std::vector<fed::ClientData> load_client_data(const RunConfig& cfg,
                                              const fs::path& out) {
  std::vector<fed::ClientData> clients;
  for (const auto& c : cfg.clients) {
    const fs::path file = out / "data" / (c.name + ".fsds");
    if (!fs::exists(file))
      throw GuardError("missing dataset " + file.string() +
                       " — run `collect` first");
    fed::ClientData cd;
    cd.name = c.name;
    cd.domain = c.domain;
    cd.train = data::load_dataset(file.string());
    if (cd.train.env_config_hash != env::env_config_hash(c.env))
      throw GuardError("dataset " + file.string() +
                       " was collected under a different env config");
    clients.push_back(std::move(cd));
  }
  return clients;
}

std::vector<std::string> domain_order(const RunConfig& cfg) {
  std::vector<std::string> order;
  for (const auto& c : cfg.clients)
    if (std::find(order.begin(), order.end(), c.domain) == order.end())
      order.push_back(c.domain);
  return order;
}

ordered_json box_json(const BoxStats& b) {
  return ordered_json{{"median", b.median},
                      {"q1", b.q1},
                      {"q3", b.q3},
                      {"whisker_low", b.whisker_low},
                      {"whisker_high", b.whisker_high},
                      {"mean", b.mean},
                      {"n", b.n}};
}

std::unique_ptr<dt::SplitDtModel<float>> load_model(const dt::DtConfig& cfg,
                                                    const fs::path& ckpt) {
  if (!fs::exists(ckpt))
    throw GuardError("missing checkpoint " + ckpt.string() +
                     " — run `train` first");
  auto model = std::make_unique<dt::SplitDtModel<float>>(cfg, 0);
  dt::load_split_checkpoint(*model, nn::read_file(ckpt.string()));
  return model;
}

}  // namespace

SplitCounts split_param_counts(const dt::DtConfig& cfg) {
  const std::uint64_t h = cfg.hidden_dim, sd = cfg.state_dim,
                      ad = cfg.action_dim, r = cfg.mlp_ratio;
  SplitCounts c;
  c.embed = (h + h)               // return embedding
            + (sd * h + h)        // state embedding
            + (ad * h + h)        // action embedding
            + cfg.max_timestep * h  // timestep table
            + 2 * h;              // embedding layer norm
  const std::uint64_t block = 2 * h                  // ln1
                              + (h * 3 * h + 3 * h)  // fused qkv
                              + (h * h + h)          // attn out proj
                              + 2 * h                // ln2
                              + (h * r * h + r * h)  // mlp in
                              + (r * h * h + h);     // mlp out
  c.decoder = static_cast<std::uint64_t>(cfg.n_blocks) * block;
  c.predict = (h * ad + ad) + (h * sd + sd) + (h + 1);
  return c;
}

void cmd_collect(const RunConfig& cfg, std::uint64_t seed,
                 const std::string& out) {
  const auto traces = make_traces(cfg.gaze, /*test=*/false);
  const fs::path data_dir = fs::path(out) / "data";
  fs::create_directories(data_dir);

  ordered_json stats_clients = ordered_json::array();
  for (std::size_t i = 0; i < cfg.clients.size(); ++i) {
    const auto& c = cfg.clients[i];
    env::MecEnvironment environment(c.env, traces,
                                    fed::mix_seed(seed, 600 + i));
    std::mt19937_64 hrng(fed::mix_seed(seed, 700 + i));
    std::mt19937_64 rrng(fed::mix_seed(seed, 800 + i));

    data::OfflineDataset ds = data::collect(
        environment,
        [&](const env::EnvObservation& obs) {
          return data::behavior_heuristic(obs, hrng,
                                          cfg.collect.heuristic_noise);
        },
        cfg.collect.heuristic_episodes, "heuristic", seed);
    if (cfg.collect.random_episodes > 0) {
      data::OfflineDataset rds = data::collect(
          environment,
          [&](const env::EnvObservation&) {
            return data::uniform_random_action(c.env.n_users, rrng);
          },
          cfg.collect.random_episodes, "random", seed);
      data::merge_into(ds, rds);
      ds.policy_name = "heuristic+random";
    }
    data::save_dataset((data_dir / (c.name + ".fsds")).string(), ds);

    const data::DatasetStats st = data::dataset_stats(ds);
    stats_clients.push_back(
        {{"name", c.name},
         {"domain", c.domain},
         {"episodes", st.episodes},
         {"return_min", st.return_min.value()},
         {"return_mean", st.return_mean.value()},
         {"return_max", st.return_max.value()},
         {"env_config_hash", ds.env_config_hash}});
  }
  write_json(data_dir / "stats.json",
             ordered_json{{"seed", seed}, {"clients", stats_clients}});
}

void cmd_train(const RunConfig& cfg, const std::string& algo,
               const std::vector<std::uint64_t>& seeds,
               const std::string& out) {
  if (!known_algo(algo)) throw ConfigError("unknown algorithm: " + algo);
  const auto clients = load_client_data(cfg, out);
  const fs::path algo_dir = fs::path(out) / "train" / algo;

  for (std::uint64_t seed : seeds) {
    fed::FedConfig f = cfg.fed;
    f.seed = seed;
    const fs::path dir = algo_dir / ("seed-" + std::to_string(seed));
    fs::create_directories(dir);

    if (algo == "fsdt") {
      fed::FsdtTrainer t(f, clients);
      t.run();
      write_text(dir / "loss.csv", loss_csv(t.history()));
      write_json(dir / "comm.json",
                 ordered_json{{"ledger", t.comm().to_json()},
                              {"analytic", analytic_comm(cfg)}});
      for (const auto& domain : domain_order(cfg))
        for (std::size_t i = 0; i < cfg.clients.size(); ++i)
          if (cfg.clients[i].domain == domain) {
            nn::write_file((dir / (domain + ".ckpt")).string(),
                           dt::save_split_checkpoint(t.client_model(i)));
            break;
          }
    } else if (algo == "fdt") {
      fed::FdtTrainer t(f, clients);
      t.run();
      write_text(dir / "loss.csv", loss_csv(t.history()));
      write_json(dir / "comm.json",
                 ordered_json{{"ledger", t.comm().to_json()},
                              {"analytic", analytic_comm(cfg)}});
      nn::write_file((dir / "model.ckpt").string(),
                     dt::save_split_checkpoint(t.global_model()));
    } else {  // cdt
      data::OfflineDataset merged = clients.front().train;
      for (std::size_t i = 1; i < clients.size(); ++i)
        data::merge_into(merged, clients[i].train);
      fed::CdtTrainer t(f, std::move(merged),
                        f.client_steps + f.server_steps);
      t.run();
      write_text(dir / "loss.csv", loss_csv(t.history()));
      write_json(dir / "comm.json",
                 ordered_json{{"ledger", fed::CommLedger{}.to_json()},
                              {"analytic", analytic_comm(cfg)}});
      nn::write_file((dir / "model.ckpt").string(),
                     dt::save_split_checkpoint(t.model()));
    }
  }

  ordered_json mclients = ordered_json::array();
  for (const auto& c : cfg.clients)
    mclients.push_back({{"name", c.name}, {"domain", c.domain}});
  write_json(algo_dir / "manifest.json",
             ordered_json{{"algo", algo},
                          {"seeds", seeds},
                          {"rounds", cfg.fed.rounds},
                          {"client_steps", cfg.fed.client_steps},
                          {"server_steps", cfg.fed.server_steps},
                          {"batch_size", cfg.fed.batch_size},
                          {"clients", mclients},
                          {"dt", run_config_to_json(cfg)["dt"]}});
}

void cmd_eval(const RunConfig& cfg, const std::string& algo,
              const std::vector<std::uint64_t>& seeds,
              const std::string& out) {
  const fs::path out_dir(out);
  std::vector<std::string> algos;
  if (algo == "all") {
    for (const char* a : kAlgos)
      if (fs::exists(out_dir / "train" / a)) algos.push_back(a);
    if (algos.empty())
      throw GuardError("no trained models under " +
                       (out_dir / "train").string());
  } else {
    if (!known_algo(algo)) throw ConfigError("unknown algorithm: " + algo);
    algos.push_back(algo);
  }

  // conditioning target and provenance come from the collection stats
  const json stats =
      read_json(out_dir / "data" / "stats.json", "run `collect` first");
  const bool auto_target = cfg.eval.target_return <= 0.0;
  double target =
      auto_target ? -std::numeric_limits<double>::infinity()
                  : cfg.eval.target_return;
  std::map<std::string, const json*> stat_by_name;
  for (const auto& sc : stats.at("clients"))
    stat_by_name[sc.at("name").get<std::string>()] = &sc;
  for (const auto& c : cfg.clients) {
    auto it = stat_by_name.find(c.name);
    if (it == stat_by_name.end())
      throw GuardError("client " + c.name + " absent from collection stats");
    if (it->second->at("env_config_hash").get<std::uint64_t>() !=
        env::env_config_hash(c.env))
      throw GuardError("env config for " + c.name +
                       " differs from the one data was collected under");
    if (auto_target)
      target = std::max(target, it->second->at("return_max").get<double>());
  }

  const auto traces = make_traces(cfg.gaze, /*test=*/true);
  const int sd = cfg.fed.dt.state_dim;

  for (const auto& a : algos) {
    std::vector<std::vector<double>> seed_mean_rewards;
    std::vector<double> all_rewards, all_qoe, all_latency_ms;
    std::vector<std::vector<double>> per_episode_rewards;  // [episode][samples]

    for (std::uint64_t seed : seeds) {
      const fs::path dir =
          out_dir / "train" / a / ("seed-" + std::to_string(seed));
      std::map<std::string, std::unique_ptr<dt::SplitDtModel<float>>> models;
      if (a == "fsdt") {
        for (const auto& domain : domain_order(cfg))
          models[domain] = load_model(cfg.fed.dt, dir / (domain + ".ckpt"));
      } else {
        models[""] = load_model(cfg.fed.dt, dir / "model.ckpt");
      }

      ordered_json jclients = ordered_json::array();
      std::vector<double> seed_rewards;
      for (std::size_t i = 0; i < cfg.clients.size(); ++i) {
        const auto& c = cfg.clients[i];
        auto& model = a == "fsdt" ? *models.at(c.domain) : *models.at("");
        env::MecEnvironment environment(c.env, traces,
                                        fed::mix_seed(seed, 900 + i));
        std::vector<double> rewards, qoe_means, lat_means;
        for (int ep = 0; ep < cfg.eval.episodes; ++ep) {
          const dt::RolloutResult r =
              dt::rollout_episode(model, environment, target);
          rewards.push_back(r.total_reward);
          if (static_cast<std::size_t>(ep) >= per_episode_rewards.size())
            per_episode_rewards.emplace_back();
          per_episode_rewards[ep].push_back(r.total_reward);
          // realized per-user outcomes: observation rows 1..len-1 reflect
          // the action taken in the previous slot
          const auto& st = r.trajectory.states;
          for (int u = 0; u < c.env.n_users; ++u) {
            double q = 0.0, lat = 0.0;
            int n = 0;
            for (int t = 1; t < r.trajectory.length; ++t, ++n) {
              const std::size_t row = static_cast<std::size_t>(t) * sd +
                                      static_cast<std::size_t>(u) * 9;
              q += st[row + 8];
              lat += st[row + 4] * 1e3;
            }
            if (n > 0) {
              qoe_means.push_back(q / n);
              lat_means.push_back(lat / n);
            }
          }
        }
        all_rewards.insert(all_rewards.end(), rewards.begin(), rewards.end());
        all_qoe.insert(all_qoe.end(), qoe_means.begin(), qoe_means.end());
        all_latency_ms.insert(all_latency_ms.end(), lat_means.begin(),
                              lat_means.end());
        seed_rewards.insert(seed_rewards.end(), rewards.begin(),
                            rewards.end());
        jclients.push_back({{"name", c.name},
                            {"rewards", rewards},
                            {"qoe_user_episode_means", qoe_means},
                            {"latency_ms_user_episode_means", lat_means}});
      }
      seed_mean_rewards.push_back(seed_rewards);
      write_json(out_dir / "eval" / a / ("seed-" + std::to_string(seed) +
                                         ".json"),
                 ordered_json{{"algo", a},
                              {"seed", seed},
                              {"target_return", target},
                              {"episodes_per_env", cfg.eval.episodes},
                              {"clients", jclients}});
    }

    ordered_json per_seed = ordered_json::array();
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      double sum = 0.0;
      for (double v : seed_mean_rewards[s]) sum += v;
      per_seed.push_back(
          {{"seed", seeds[s]},
           {"mean_reward", sum / seed_mean_rewards[s].size()}});
    }
    write_json(out_dir / "eval" / a / "summary.json",
               ordered_json{{"algo", a},
                            {"target_return", target},
                            {"episodes_total", all_rewards.size()},
                            {"reward", box_json(box_stats(all_rewards))},
                            {"qoe", box_json(box_stats(all_qoe))},
                            {"latency_ms",
                             box_json(box_stats(all_latency_ms))},
                            {"per_seed", per_seed}});
  }
}

void cmd_report(const RunConfig& cfg, const std::string& out) {
  const fs::path out_dir(out);
  const fs::path eval_dir = out_dir / "eval";
  const fs::path report_dir = out_dir / "report";
  fs::create_directories(report_dir);

  std::vector<std::string> algos;
  for (const char* a : kAlgos)
    if (fs::exists(eval_dir / a / "summary.json")) algos.push_back(a);
  if (algos.empty())
    throw GuardError("no evaluation summaries under " + eval_dir.string() +
                     " — run `eval` first");

  // rewards.csv: per-episode reward averaged across seeds and environments,
  // then a trailing moving average (window 10)
  std::map<std::string, std::vector<double>> curves;
  for (const auto& a : algos) {
    std::map<int, std::pair<double, int>> acc;  // episode -> (sum, n)
    for (const auto& entry : fs::directory_iterator(eval_dir / a)) {
      const std::string fn = entry.path().filename().string();
      if (fn.rfind("seed-", 0) != 0) continue;
      const json j = read_json(entry.path(), "eval output");
      for (const auto& c : j.at("clients")) {
        const auto& rewards = c.at("rewards");
        for (std::size_t e = 0; e < rewards.size(); ++e) {
          auto& [sum, n] = acc[static_cast<int>(e)];
          sum += rewards[e].get<double>();
          ++n;
        }
      }
    }
    std::vector<double> mean;
    for (const auto& [e, sn] : acc) mean.push_back(sn.first / sn.second);
    curves[a] = moving_average(mean, 10);
  }
  std::size_t max_len = 0;
  for (const auto& [a, v] : curves) max_len = std::max(max_len, v.size());
  std::string csv = "episode";
  for (const auto& a : algos) csv += "," + a;
  csv += "\n";
  for (std::size_t e = 0; e < max_len; ++e) {
    csv += std::to_string(e);
    for (const auto& a : algos) {
      csv += ",";
      if (e < curves[a].size()) csv += format_loss(curves[a][e]);
    }
    csv += "\n";
  }
  write_text(report_dir / "rewards.csv", csv);

  ordered_json qoe_box, lat_box;
  for (const auto& a : algos) {
    const json s = read_json(eval_dir / a / "summary.json", "eval output");
    qoe_box[a] = s.at("qoe");
    lat_box[a] = s.at("latency_ms");
  }
  write_json(report_dir / "qoe_box.json", qoe_box);
  write_json(report_dir / "latency_box.json", lat_box);

  const SplitCounts c = split_param_counts(cfg.fed.dt);
  const double mib = 1024.0 * 1024.0;
  const double total = static_cast<double>(c.total());
  write_json(
      report_dir / "split_table.json",
      ordered_json{
          {"embedding",
           {{"params", c.embed},
            {"mib", c.embed * 4.0 / mib},
            {"share_pct", 100.0 * c.embed / total}}},
          {"decoder",
           {{"params", c.decoder},
            {"mib", c.decoder * 4.0 / mib},
            {"share_pct", 100.0 * c.decoder / total}}},
          {"prediction",
           {{"params", c.predict},
            {"mib", c.predict * 4.0 / mib},
            {"share_pct", 100.0 * c.predict / total}}},
          {"total", {{"params", c.total()}, {"mib", total * 4.0 / mib}}}});

  ordered_json metered;
  for (const char* a : kAlgos) {
    const fs::path comm = out_dir / "train" / a;
    if (!fs::exists(comm)) continue;
    std::vector<fs::path> seed_dirs;
    for (const auto& entry : fs::directory_iterator(comm))
      if (entry.is_directory()) seed_dirs.push_back(entry.path());
    std::sort(seed_dirs.begin(), seed_dirs.end());
    if (seed_dirs.empty()) continue;
    const json j = read_json(seed_dirs.front() / "comm.json", "train output");
    metered[a] = {
        {"grand_total_floats",
         j.at("ledger").at("grand_total_floats").get<std::uint64_t>()}};
  }
  write_json(report_dir / "comm_cost.json",
             ordered_json{{"analytic", analytic_comm(cfg)},
                          {"metered", metered}});
}

void cmd_params(const RunConfig& cfg, std::ostream& os) {
  const SplitCounts c = split_param_counts(cfg.fed.dt);

  // cross-check against the real parameter sets
  dt::SplitDtModel<float> model(cfg.fed.dt, 1);
  const std::uint64_t embed = model.embed_params().count().params;
  const std::uint64_t decoder = model.decoder_params().count().params;
  const std::uint64_t predict = model.predict_params().count().params;
  if (embed != c.embed || decoder != c.decoder || predict != c.predict)
    throw GuardError("closed-form parameter counts diverge from the model");

  const double mib = 1024.0 * 1024.0;
  const double total = static_cast<double>(c.total());
  char line[128];
  os << "subnetwork   params      MiB      share\n";
  const struct {
    const char* name;
    std::uint64_t n;
  } rows[] = {{"embedding", c.embed},
              {"decoder", c.decoder},
              {"prediction", c.predict}};
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%-11s %9llu  %8.3f  %6.2f%%\n", r.name,
                  static_cast<unsigned long long>(r.n), r.n * 4.0 / mib,
                  100.0 * r.n / total);
    os << line;
  }
  std::snprintf(line, sizeof(line), "%-11s %9llu  %8.3f\n", "total",
                static_cast<unsigned long long>(c.total()), total * 4.0 / mib);
  os << line;

  const dt::DtConfig def;  // reference architecture
  const bool is_default =
      cfg.fed.dt.hidden_dim == def.hidden_dim &&
      cfg.fed.dt.n_blocks == def.n_blocks &&
      cfg.fed.dt.n_heads == def.n_heads &&
      cfg.fed.dt.context_length == def.context_length &&
      cfg.fed.dt.state_dim == def.state_dim &&
      cfg.fed.dt.action_dim == def.action_dim &&
      cfg.fed.dt.max_timestep == def.max_timestep &&
      cfg.fed.dt.mlp_ratio == def.mlp_ratio;
  if (is_default &&
      (c.embed != kTableEmbedParams || c.decoder != kTableDecoderParams ||
       c.predict != kTablePredictParams))
    throw GuardError("default-config parameter counts diverge from reference");
}

}  // namespace fsdt::harness
