#include "fsdt/data/dataset.hpp"

#include <cstring>
#include <fstream>

#include "fsdt/dt/rtg.hpp"
#include "fsdt/env/config.hpp"

namespace fsdt::data {

OfflineDataset collect(env::MecEnvironment& environment, const Policy& policy,
                       int episodes, const std::string& policy_name,
                       std::uint64_t seed) {
  if (episodes <= 0) throw std::invalid_argument("episodes must be positive");
  const auto& cfg = environment.config();
  OfflineDataset ds;
  ds.state_dim = cfg.state_dim();
  ds.action_dim = cfg.action_dim();
  ds.env_config_hash = env::env_config_hash(cfg);
  ds.policy_name = policy_name;
  ds.seed = seed;
  ds.trajectories.reserve(episodes);

  for (int ep = 0; ep < episodes; ++ep) {
    Trajectory traj;
    traj.env_id = cfg.id;
    env::EnvObservation obs = environment.reset();
    while (!environment.done()) {
      const std::vector<double> raw = policy(obs);
      const auto flat = obs.flatten();
      traj.states.insert(traj.states.end(), flat.begin(), flat.end());
      traj.actions.insert(traj.actions.end(), raw.begin(), raw.end());
      auto result = environment.step(raw);
      traj.rewards.push_back(static_cast<float>(result.reward));
      obs = std::move(result.obs);
    }
    traj.length = static_cast<int>(traj.rewards.size());
    traj.rtg = dt::compute_rtg(traj.rewards);
    ds.trajectories.push_back(std::move(traj));
  }
  return ds;
}

void merge_into(OfflineDataset& base, const OfflineDataset& extra) {
  if (base.state_dim != extra.state_dim || base.action_dim != extra.action_dim)
    throw DatasetError("dataset dimension mismatch on merge");
  base.trajectories.insert(base.trajectories.end(), extra.trajectories.begin(),
                           extra.trajectories.end());
}

namespace {

constexpr char kMagic[4] = {'F', 'S', 'D', 'S'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::vector<std::uint8_t>& out, T v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

void put_string(std::vector<std::uint8_t>& out, const std::string& s) {
  put(out, static_cast<std::uint16_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

void put_floats(std::vector<std::uint8_t>& out, const std::vector<float>& v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(v.data());
  out.insert(out.end(), p, p + v.size() * sizeof(float));
}

struct Reader {
  const std::vector<std::uint8_t>& b;
  std::size_t pos = 0;

  template <class T>
  T get() {
    if (pos + sizeof(T) > b.size()) throw DatasetError("dataset file truncated");
    T v;
    std::memcpy(&v, b.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
  }

  std::string get_string() {
    const auto n = get<std::uint16_t>();
    if (pos + n > b.size()) throw DatasetError("dataset file truncated");
    std::string s(reinterpret_cast<const char*>(b.data() + pos), n);
    pos += n;
    return s;
  }

  std::vector<float> get_floats(std::size_t n) {
    if (pos + n * sizeof(float) > b.size())
      throw DatasetError("dataset file truncated");
    std::vector<float> v(n);
    std::memcpy(v.data(), b.data() + pos, n * sizeof(float));
    pos += n * sizeof(float);
    return v;
  }
};

void validate_rtg(const Trajectory& t) {
  for (int i = 0; i + 1 < t.length; ++i)
    if (t.rtg[i] != t.rtg[i + 1] + t.rewards[i])
      throw DatasetError("RTG consistency violated in trajectory " + t.env_id);
  if (t.length > 0 && t.rtg[t.length - 1] != t.rewards[t.length - 1])
    throw DatasetError("RTG terminal value violated in trajectory " + t.env_id);
}

}  // namespace

std::vector<std::uint8_t> serialize_dataset(const OfflineDataset& ds) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 4);
  put(out, kVersion);
  put(out, ds.env_config_hash);
  put(out, static_cast<std::uint32_t>(ds.state_dim));
  put(out, static_cast<std::uint32_t>(ds.action_dim));
  put_string(out, ds.policy_name);
  put(out, ds.seed);
  put_string(out, ds.split);
  put(out, static_cast<std::uint32_t>(ds.trajectories.size()));
  for (const auto& t : ds.trajectories) {
    put_string(out, t.env_id);
    put(out, static_cast<std::uint32_t>(t.length));
    put_floats(out, t.rtg);
    put_floats(out, t.states);
    put_floats(out, t.actions);
    put_floats(out, t.rewards);
  }
  return out;
}

OfflineDataset deserialize_dataset(const std::vector<std::uint8_t>& bytes) {
  Reader r{bytes};
  char magic[4];
  if (bytes.size() < 4) throw DatasetError("dataset file truncated");
  std::memcpy(magic, bytes.data(), 4);
  r.pos = 4;
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw DatasetError("bad dataset magic");
  if (r.get<std::uint32_t>() != kVersion)
    throw DatasetError("unsupported dataset version");
  OfflineDataset ds;
  ds.env_config_hash = r.get<std::uint64_t>();
  ds.state_dim = static_cast<int>(r.get<std::uint32_t>());
  ds.action_dim = static_cast<int>(r.get<std::uint32_t>());
  ds.policy_name = r.get_string();
  ds.seed = r.get<std::uint64_t>();
  ds.split = r.get_string();
  const auto count = r.get<std::uint32_t>();
  ds.trajectories.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    Trajectory t;
    t.env_id = r.get_string();
    t.length = static_cast<int>(r.get<std::uint32_t>());
    t.rtg = r.get_floats(t.length);
    t.states = r.get_floats(static_cast<std::size_t>(t.length) * ds.state_dim);
    t.actions = r.get_floats(static_cast<std::size_t>(t.length) * ds.action_dim);
    t.rewards = r.get_floats(t.length);
    validate_rtg(t);
    ds.trajectories.push_back(std::move(t));
  }
  if (r.pos != bytes.size()) throw DatasetError("trailing bytes in dataset file");
  return ds;
}

void save_dataset(const std::string& path, const OfflineDataset& ds) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DatasetError("cannot open for write: " + path);
  const auto bytes = serialize_dataset(ds);
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!f) throw DatasetError("write failed: " + path);
}

OfflineDataset load_dataset(const std::string& path) {
  std::ifstream f(path, std::ios::binary | std::ios::ate);
  if (!f) throw DatasetError("cannot open: " + path);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(f.tellg()));
  f.seekg(0);
  f.read(reinterpret_cast<char*>(bytes.data()),
         static_cast<std::streamsize>(bytes.size()));
  if (!f) throw DatasetError("read failed: " + path);
  return deserialize_dataset(bytes);
}

DatasetStats dataset_stats(const OfflineDataset& ds) {
  DatasetStats stats;
  stats.episodes = static_cast<int>(ds.trajectories.size());
  if (ds.trajectories.empty()) return stats;
  double mn = 0.0, mx = 0.0, sum = 0.0;
  bool first = true;
  std::vector<double> action_sum(ds.action_dim, 0.0);
  std::size_t action_rows = 0;
  for (const auto& t : ds.trajectories) {
    const double ret = t.episode_return();
    if (first) {
      mn = mx = ret;
      first = false;
    } else {
      mn = std::min(mn, ret);
      mx = std::max(mx, ret);
    }
    sum += ret;
    for (int i = 0; i < t.length; ++i)
      for (int d = 0; d < ds.action_dim; ++d)
        action_sum[d] += t.actions[static_cast<std::size_t>(i) * ds.action_dim + d];
    action_rows += static_cast<std::size_t>(t.length);
  }
  stats.return_min = mn;
  stats.return_max = mx;
  stats.return_mean = sum / stats.episodes;
  stats.action_mean.resize(ds.action_dim);
  for (int d = 0; d < ds.action_dim; ++d)
    stats.action_mean[d] = action_rows ? action_sum[d] / action_rows : 0.0;
  return stats;
}

}  // namespace fsdt::data
