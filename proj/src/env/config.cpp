#include "fsdt/env/config.hpp"

#include <fstream>
#include <set>

namespace fsdt::env {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ordered_json triple_to_json(const QualityTriple& t) {
  return ordered_json{{"low", t.low}, {"med", t.med}, {"high", t.high}};
}

QualityTriple triple_from_json(const json& j, const QualityTriple& base) {
  QualityTriple t = base;
  t.low = j.value("low", t.low);
  t.med = j.value("med", t.med);
  t.high = j.value("high", t.high);
  return t;
}

void reject_unknown(const json& j, const std::set<std::string>& known,
                    const std::string& ctx) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw std::invalid_argument("unknown key in " + ctx + ": " + it.key());
}

}  // namespace

ordered_json env_config_to_json(const EnvConfig& cfg) {
  ordered_json j;
  j["id"] = cfg.id;
  j["profile"] = ordered_json{
      {"name", cfg.profile.name},
      {"bandwidth_hz", cfg.profile.bandwidth_hz},
      {"carrier_hz", cfg.profile.carrier_hz},
      {"ple", cfg.profile.ple},
      {"shadow_sigma_db", cfg.profile.shadow_sigma_db},
      {"max_dist_m", cfg.profile.max_dist_m},
      {"tx_power_dbm", cfg.profile.tx_power_dbm},
  };
  j["compute"] = ordered_json{
      {"cpu_cycles_per_bit", triple_to_json(cfg.compute.cpu_cycles_per_bit)},
      {"gpu_cost", cfg.compute.gpu_cost},
      {"cpu_capacity", cfg.compute.cpu_capacity},
      {"gpu_capacity", cfg.compute.gpu_capacity},
      {"pixels_per_tile", triple_to_json(cfg.compute.pixels_per_tile)},
      {"frames_per_gop", cfg.compute.frames_per_gop},
      {"tiles_per_frame", cfg.compute.tiles_per_frame},
  };
  j["qoe"] = ordered_json{
      {"quality_weights", triple_to_json(cfg.qoe.quality_weights)},
      {"bitrate_thresholds", triple_to_json(cfg.qoe.bitrate_thresholds)},
      {"switch_penalty", cfg.qoe.switch_penalty},
      {"qoe_min", cfg.qoe.qoe_min},
      {"fairness_weight", cfg.qoe.fairness_weight},
      {"violation_weight", cfg.qoe.violation_weight},
      {"log_base", cfg.qoe.log_base},
  };
  j["n_users"] = cfg.n_users;
  j["episode_slots"] = cfg.episode_slots;
  j["max_bitrates"] = triple_to_json(cfg.max_bitrates);
  j["compression"] = cfg.compression;
  j["latency_threshold_s"] = cfg.latency_threshold_s;
  j["noise_psd"] = cfg.noise_psd;
  j["noise_figure_db"] = cfg.noise_figure_db;
  j["gaze_radius_high"] = cfg.gaze_radius_high;
  j["gaze_radius_med"] = cfg.gaze_radius_med;
  j["fading_floor"] = cfg.fading_floor;
  j["qoe_floor"] = cfg.qoe_floor;
  return j;
}

EnvConfig env_config_from_json(const json& j, const EnvConfig& base) {
  EnvConfig cfg = base;
  reject_unknown(j,
                 {"id", "profile", "compute", "qoe", "n_users", "episode_slots",
                  "max_bitrates", "compression", "latency_threshold_s",
                  "noise_psd", "noise_figure_db", "gaze_radius_high",
                  "gaze_radius_med", "fading_floor", "qoe_floor"},
                 "env config");
  cfg.id = j.value("id", cfg.id);
  if (j.contains("profile")) {
    const auto& p = j.at("profile");
    if (p.is_string()) {
      cfg.profile = RatProfile::by_name(p.get<std::string>());
    } else {
      reject_unknown(p,
                     {"name", "bandwidth_hz", "carrier_hz", "ple",
                      "shadow_sigma_db", "max_dist_m", "tx_power_dbm"},
                     "profile");
      // a named builtin may be used as the base for field overrides
      if (p.contains("name")) {
        try {
          cfg.profile = RatProfile::by_name(p.at("name").get<std::string>());
        } catch (const std::invalid_argument&) {
          cfg.profile.name = p.at("name").get<std::string>();
        }
      }
      cfg.profile.bandwidth_hz = p.value("bandwidth_hz", cfg.profile.bandwidth_hz);
      cfg.profile.carrier_hz = p.value("carrier_hz", cfg.profile.carrier_hz);
      cfg.profile.ple = p.value("ple", cfg.profile.ple);
      cfg.profile.shadow_sigma_db =
          p.value("shadow_sigma_db", cfg.profile.shadow_sigma_db);
      cfg.profile.max_dist_m = p.value("max_dist_m", cfg.profile.max_dist_m);
      cfg.profile.tx_power_dbm = p.value("tx_power_dbm", cfg.profile.tx_power_dbm);
    }
    cfg.profile.validate();
  }
  if (j.contains("compute")) {
    const auto& c = j.at("compute");
    reject_unknown(c,
                   {"cpu_cycles_per_bit", "gpu_cost", "cpu_capacity",
                    "gpu_capacity", "pixels_per_tile", "frames_per_gop",
                    "tiles_per_frame"},
                   "compute");
    if (c.contains("cpu_cycles_per_bit"))
      cfg.compute.cpu_cycles_per_bit = triple_from_json(
          c.at("cpu_cycles_per_bit"), cfg.compute.cpu_cycles_per_bit);
    cfg.compute.gpu_cost = c.value("gpu_cost", cfg.compute.gpu_cost);
    cfg.compute.cpu_capacity = c.value("cpu_capacity", cfg.compute.cpu_capacity);
    cfg.compute.gpu_capacity = c.value("gpu_capacity", cfg.compute.gpu_capacity);
    if (c.contains("pixels_per_tile"))
      cfg.compute.pixels_per_tile =
          triple_from_json(c.at("pixels_per_tile"), cfg.compute.pixels_per_tile);
    cfg.compute.frames_per_gop =
        c.value("frames_per_gop", cfg.compute.frames_per_gop);
    cfg.compute.tiles_per_frame =
        c.value("tiles_per_frame", cfg.compute.tiles_per_frame);
  }
  if (j.contains("qoe")) {
    const auto& q = j.at("qoe");
    reject_unknown(q,
                   {"quality_weights", "bitrate_thresholds", "switch_penalty",
                    "qoe_min", "fairness_weight", "violation_weight",
                    "log_base"},
                   "qoe");
    if (q.contains("quality_weights"))
      cfg.qoe.quality_weights =
          triple_from_json(q.at("quality_weights"), cfg.qoe.quality_weights);
    if (q.contains("bitrate_thresholds"))
      cfg.qoe.bitrate_thresholds = triple_from_json(q.at("bitrate_thresholds"),
                                                    cfg.qoe.bitrate_thresholds);
    cfg.qoe.switch_penalty = q.value("switch_penalty", cfg.qoe.switch_penalty);
    cfg.qoe.qoe_min = q.value("qoe_min", cfg.qoe.qoe_min);
    cfg.qoe.fairness_weight = q.value("fairness_weight", cfg.qoe.fairness_weight);
    cfg.qoe.violation_weight =
        q.value("violation_weight", cfg.qoe.violation_weight);
    cfg.qoe.log_base = q.value("log_base", cfg.qoe.log_base);
  }
  cfg.n_users = j.value("n_users", cfg.n_users);
  cfg.episode_slots = j.value("episode_slots", cfg.episode_slots);
  if (j.contains("max_bitrates"))
    cfg.max_bitrates = triple_from_json(j.at("max_bitrates"), cfg.max_bitrates);
  cfg.compression = j.value("compression", cfg.compression);
  cfg.latency_threshold_s =
      j.value("latency_threshold_s", cfg.latency_threshold_s);
  cfg.noise_psd = j.value("noise_psd", cfg.noise_psd);
  cfg.noise_figure_db = j.value("noise_figure_db", cfg.noise_figure_db);
  cfg.gaze_radius_high = j.value("gaze_radius_high", cfg.gaze_radius_high);
  cfg.gaze_radius_med = j.value("gaze_radius_med", cfg.gaze_radius_med);
  cfg.fading_floor = j.value("fading_floor", cfg.fading_floor);
  cfg.qoe_floor = j.value("qoe_floor", cfg.qoe_floor);
  return cfg;
}

EnvConfig load_env_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open env config: " + path);
  json j;
  f >> j;
  return env_config_from_json(j);
}

std::uint64_t env_config_hash(const EnvConfig& cfg) {
  const std::string dump = env_config_to_json(cfg).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace fsdt::env
