#pragma once
// Offline trajectory datasets: collection, binary serialization ("FSDS"
// format), RTG annotation and summary statistics.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsdt/env/environment.hpp"

namespace fsdt::data {

struct Trajectory {
  std::string env_id;
  int length = 0;
  // row-major [length x dim] buffers; rtg[t] = rtg[t+1] + reward[t] holds
  // exactly in 32-bit float arithmetic
  std::vector<float> rtg;
  std::vector<float> states;
  std::vector<float> actions;
  std::vector<float> rewards;

  float episode_return() const { return rtg.empty() ? 0.0f : rtg.front(); }
};

struct OfflineDataset {
  int state_dim = 36;
  int action_dim = 24;
  std::uint64_t env_config_hash = 0;
  std::string policy_name;
  std::uint64_t seed = 0;
  std::string split = "train";
  std::vector<Trajectory> trajectories;

  bool empty() const { return trajectories.empty(); }
};

struct DatasetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// policy: observation -> raw action in (0,1)^action_dim
using Policy = std::function<std::vector<double>(const env::EnvObservation&)>;

OfflineDataset collect(env::MecEnvironment& environment, const Policy& policy,
                       int episodes, const std::string& policy_name,
                       std::uint64_t seed);

// Appends the trajectories of `extra` to `base`; dims and env hash must match.
void merge_into(OfflineDataset& base, const OfflineDataset& extra);

std::vector<std::uint8_t> serialize_dataset(const OfflineDataset& ds);
OfflineDataset deserialize_dataset(const std::vector<std::uint8_t>& bytes);
void save_dataset(const std::string& path, const OfflineDataset& ds);
OfflineDataset load_dataset(const std::string& path);

struct DatasetStats {
  int episodes = 0;
  std::optional<double> return_min, return_mean, return_max;
  std::vector<double> action_mean;  // per-dimension marginal means
};
DatasetStats dataset_stats(const OfflineDataset& ds);

}  // namespace fsdt::data
