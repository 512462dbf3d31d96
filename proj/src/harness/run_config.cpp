#include "fsdt/harness/run_config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

namespace fsdt::harness {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known,
                    const std::string& ctx) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw ConfigError("unknown key in " + ctx + ": " + it.key());
}

ClientSpec make_client(const std::string& name, const std::string& domain,
                       const std::string& profile) {
  ClientSpec c;
  c.name = name;
  c.domain = domain;
  c.env.id = name;
  c.env.profile = env::RatProfile::by_name(profile);
  return c;
}

void apply_dt(dt::DtConfig& dt, const json& j) {
  // state_dim/action_dim are accepted but derived from the environments
  reject_unknown(j,
                 {"n_heads", "n_blocks", "hidden_dim", "context_length",
                  "max_timestep", "mlp_ratio", "dropout", "rtg_scale",
                  "loss_weight_action", "loss_weight_state",
                  "loss_weight_return", "state_dim", "action_dim"},
                 "dt");
  dt.n_heads = j.value("n_heads", dt.n_heads);
  dt.n_blocks = j.value("n_blocks", dt.n_blocks);
  dt.hidden_dim = j.value("hidden_dim", dt.hidden_dim);
  dt.context_length = j.value("context_length", dt.context_length);
  dt.max_timestep = j.value("max_timestep", dt.max_timestep);
  dt.mlp_ratio = j.value("mlp_ratio", dt.mlp_ratio);
  dt.dropout = j.value("dropout", dt.dropout);
  dt.rtg_scale = j.value("rtg_scale", dt.rtg_scale);
  dt.loss_weight_action = j.value("loss_weight_action", dt.loss_weight_action);
  dt.loss_weight_state = j.value("loss_weight_state", dt.loss_weight_state);
  dt.loss_weight_return = j.value("loss_weight_return", dt.loss_weight_return);
}

void apply_fed(fed::FedConfig& fed, const json& j) {
  reject_unknown(j,
                 {"rounds", "client_steps", "server_steps", "batch_size",
                  "lr", "weight_decay", "seed"},
                 "fed");
  fed.rounds = j.value("rounds", fed.rounds);
  fed.client_steps = j.value("client_steps", fed.client_steps);
  fed.server_steps = j.value("server_steps", fed.server_steps);
  fed.batch_size = j.value("batch_size", fed.batch_size);
  fed.opt.lr = j.value("lr", fed.opt.lr);
  fed.opt.weight_decay = j.value("weight_decay", fed.opt.weight_decay);
  fed.seed = j.value("seed", fed.seed);
}

}  // namespace

RunConfig default_run_config() {
  RunConfig cfg;
  cfg.clients = {
      make_client("umb-umi", "umb", "UMB/UMi"),
      make_client("umb-inh", "umb", "UMB/InH"),
      make_client("sub6-umi", "sub6", "Sub6GHz/UMi"),
      make_client("sub6-inh", "sub6", "Sub6GHz/InH"),
      make_client("wifi-inh", "wifi", "Wi-Fi/InH"),
  };
  cfg.fed.dt.state_dim = cfg.clients.front().env.state_dim();
  cfg.fed.dt.action_dim = cfg.clients.front().env.action_dim();
  return cfg;
}

RunConfig run_config_from_json(const json& j) {
  RunConfig cfg = default_run_config();
  reject_unknown(j, {"dt", "fed", "clients", "gaze", "collect", "eval"},
                 "run config");
  if (j.contains("dt")) apply_dt(cfg.fed.dt, j.at("dt"));
  if (j.contains("fed")) apply_fed(cfg.fed, j.at("fed"));

  if (j.contains("clients")) {
    cfg.clients.clear();
    for (const auto& cj : j.at("clients")) {
      reject_unknown(cj, {"name", "domain", "env"}, "client");
      ClientSpec c;
      c.name = cj.value("name", "");
      c.domain = cj.value("domain", "");
      if (c.name.empty() || c.domain.empty())
        throw ConfigError("client needs name and domain");
      c.env.id = c.name;
      if (cj.contains("env")) {
        try {
          c.env = env::env_config_from_json(cj.at("env"), c.env);
        } catch (const std::invalid_argument& e) {
          throw ConfigError(e.what());
        }
      }
      cfg.clients.push_back(std::move(c));
    }
    if (cfg.clients.empty()) throw ConfigError("client list is empty");
  }

  if (j.contains("gaze")) {
    const auto& g = j.at("gaze");
    reject_unknown(g, {"traces", "frames", "smoothness", "train_ratio",
                       "seed", "dir"},
                   "gaze");
    cfg.gaze.traces = g.value("traces", cfg.gaze.traces);
    cfg.gaze.frames = g.value("frames", cfg.gaze.frames);
    cfg.gaze.smoothness = g.value("smoothness", cfg.gaze.smoothness);
    cfg.gaze.train_ratio = g.value("train_ratio", cfg.gaze.train_ratio);
    cfg.gaze.seed = g.value("seed", cfg.gaze.seed);
    cfg.gaze.dir = g.value("dir", cfg.gaze.dir);
  }
  if (j.contains("collect")) {
    const auto& c = j.at("collect");
    reject_unknown(c, {"heuristic_episodes", "random_episodes",
                       "heuristic_noise"},
                   "collect");
    cfg.collect.heuristic_episodes =
        c.value("heuristic_episodes", cfg.collect.heuristic_episodes);
    cfg.collect.random_episodes =
        c.value("random_episodes", cfg.collect.random_episodes);
    cfg.collect.heuristic_noise =
        c.value("heuristic_noise", cfg.collect.heuristic_noise);
  }
  if (j.contains("eval")) {
    const auto& e = j.at("eval");
    reject_unknown(e, {"episodes", "target_return"}, "eval");
    cfg.eval.episodes = e.value("episodes", cfg.eval.episodes);
    cfg.eval.target_return = e.value("target_return", cfg.eval.target_return);
  }

  // model I/O dims always follow the environments
  const int sd = cfg.clients.front().env.state_dim();
  const int ad = cfg.clients.front().env.action_dim();
  for (const auto& c : cfg.clients)
    if (c.env.state_dim() != sd || c.env.action_dim() != ad)
      throw ConfigError("clients disagree on state/action dimensions");
  cfg.fed.dt.state_dim = sd;
  cfg.fed.dt.action_dim = ad;
  if (cfg.fed.dt.max_timestep < cfg.clients.front().env.episode_slots)
    throw ConfigError("dt.max_timestep smaller than episode length");
  try {
    cfg.fed.dt.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (cfg.fed.rounds < 0 || cfg.fed.client_steps < 0 ||
      cfg.fed.server_steps < 0 || cfg.fed.batch_size <= 0)
    throw ConfigError("invalid federation budgets");
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config: " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return run_config_from_json(j);
}

ordered_json run_config_to_json(const RunConfig& cfg) {
  ordered_json j;
  j["dt"] = {{"n_heads", cfg.fed.dt.n_heads},
             {"n_blocks", cfg.fed.dt.n_blocks},
             {"hidden_dim", cfg.fed.dt.hidden_dim},
             {"context_length", cfg.fed.dt.context_length},
             {"max_timestep", cfg.fed.dt.max_timestep},
             {"mlp_ratio", cfg.fed.dt.mlp_ratio},
             {"dropout", cfg.fed.dt.dropout},
             {"rtg_scale", cfg.fed.dt.rtg_scale},
             {"state_dim", cfg.fed.dt.state_dim},
             {"action_dim", cfg.fed.dt.action_dim}};
  j["fed"] = {{"rounds", cfg.fed.rounds},
              {"client_steps", cfg.fed.client_steps},
              {"server_steps", cfg.fed.server_steps},
              {"batch_size", cfg.fed.batch_size},
              {"lr", cfg.fed.opt.lr},
              {"weight_decay", cfg.fed.opt.weight_decay},
              {"seed", cfg.fed.seed}};
  j["clients"] = ordered_json::array();
  for (const auto& c : cfg.clients)
    j["clients"].push_back({{"name", c.name},
                            {"domain", c.domain},
                            {"env", env::env_config_to_json(c.env)}});
  j["gaze"] = {{"traces", cfg.gaze.traces},
               {"frames", cfg.gaze.frames},
               {"smoothness", cfg.gaze.smoothness},
               {"train_ratio", cfg.gaze.train_ratio},
               {"seed", cfg.gaze.seed},
               {"dir", cfg.gaze.dir}};
  j["collect"] = {{"heuristic_episodes", cfg.collect.heuristic_episodes},
                  {"random_episodes", cfg.collect.random_episodes},
                  {"heuristic_noise", cfg.collect.heuristic_noise}};
  j["eval"] = {{"episodes", cfg.eval.episodes},
               {"target_return", cfg.eval.target_return}};
  return j;
}

std::vector<gaze::GazeTrace> make_traces(const GazeConfig& cfg, bool test) {
  std::vector<gaze::GazeTrace> raw;
  if (!cfg.dir.empty()) {
    std::vector<std::string> files;
    for (const auto& entry : std::filesystem::directory_iterator(cfg.dir))
      if (entry.is_regular_file() && entry.path().extension() == ".csv")
        files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty())
      throw ConfigError("no .csv gaze traces in " + cfg.dir);
    for (const auto& f : files) raw.push_back(gaze::load_trace_file(f));
  } else {
    std::mt19937_64 rng(cfg.seed);
    for (int i = 0; i < cfg.traces; ++i) {
      auto t = gaze::synth_trace(cfg.frames, rng, cfg.smoothness);
      t.video_id = "synth-" + std::to_string(i);
      raw.push_back(std::move(t));
    }
  }
  std::vector<gaze::GazeTrace> out;
  out.reserve(raw.size());
  for (const auto& t : raw) {
    auto [train, held_out] = gaze::temporal_split(t, cfg.train_ratio);
    auto& pick = test ? held_out : train;
    if (pick.empty())
      throw ConfigError("gaze split leaves an empty " +
                        std::string(test ? "test" : "train") + " slice");
    out.push_back(std::move(pick));
  }
  return out;
}

}  // namespace fsdt::harness
