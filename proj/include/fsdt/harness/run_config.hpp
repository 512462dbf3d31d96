#pragma once
// Experiment configuration: model, federation, client environments, data
// collection and evaluation knobs. JSON overrides on top of the five-client
// reference setup.

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fsdt/env/config.hpp"
#include "fsdt/fed/federation.hpp"
#include "fsdt/gaze/gaze.hpp"

namespace fsdt::harness {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ClientSpec {
  std::string name;
  std::string domain;
  env::EnvConfig env;
};

struct GazeConfig {
  int traces = 16;
  int frames = 1500;
  double smoothness = 0.03;
  double train_ratio = 0.8;
  std::uint64_t seed = 7;
  std::string dir;  // optional: load CSV traces from here instead
};

struct CollectConfig {
  int heuristic_episodes = 200;
  int random_episodes = 50;
  double heuristic_noise = 0.2;
};

struct EvalConfig {
  int episodes = 100;
  // <= 0 means auto: condition on the best training-set episode return
  double target_return = 0.0;
};

struct RunConfig {
  fed::FedConfig fed;  // carries the DtConfig
  std::vector<ClientSpec> clients;
  GazeConfig gaze;
  CollectConfig collect;
  EvalConfig eval;
};

// The reference setup: five Table-I clients in three domains, full-size model.
RunConfig default_run_config();

RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);
nlohmann::ordered_json run_config_to_json(const RunConfig& cfg);

// Deterministic synthetic gaze corpus, temporally split: training slice for
// collection, held-out tail for evaluation.
std::vector<gaze::GazeTrace> make_traces(const GazeConfig& cfg, bool test);

}  // namespace fsdt::harness
