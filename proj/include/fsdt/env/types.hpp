#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fsdt::env {

// Per-quality values ordered low (SD), med (HD), high (UHD).
struct QualityTriple {
  double low = 0.0;
  double med = 0.0;
  double high = 0.0;
};

// One Table-I row: per-RAT/clutter radio parameters.
struct RatProfile {
  std::string name;
  double bandwidth_hz = 0.0;
  double carrier_hz = 0.0;
  double ple = 2.0;              // path loss exponent
  double shadow_sigma_db = 0.0;  // log-normal shadowing std dev
  double max_dist_m = 0.0;       // square-region side length
  double tx_power_dbm = 0.0;

  void validate() const {
    if (bandwidth_hz <= 0.0 || carrier_hz <= 0.0 || ple < 2.0 ||
        max_dist_m <= 0.0)
      throw std::invalid_argument("invalid RAT profile: " + name);
  }

  static const std::vector<RatProfile>& builtins();
  static const RatProfile& by_name(const std::string& name);
};

struct ComputeModel {
  QualityTriple cpu_cycles_per_bit{200.0, 190.0, 180.0};
  double gpu_cost = 1.0;          // GPU work units per pixel
  double cpu_capacity = 15e9;     // cycles/s
  double gpu_capacity = 15e9;     // pixels/s
  // 16-tile 4K frames: (1280x720, 1920x1080, 3840x2160) / 16 pixels per tile
  QualityTriple pixels_per_tile{57600.0, 129600.0, 518400.0};
  int frames_per_gop = 16;
  int tiles_per_frame = 16;
};

struct TileCounts {
  int high = 0;
  int med = 0;
  int low = 0;
  int total() const { return high + med + low; }
};

// Per-user GoP encoding plan for one slot.
struct GopPlan {
  TileCounts tile_counts;
  QualityTriple resolution_ratios;  // r_q, inside the quality-limit intervals
  QualityTriple max_bitrates{0.5e6, 1.4e6, 12.4e6};  // B_q,max bits/tile
};

struct LinkState {
  double distance_m = 1.0;
  double shadowing_db = 0.0;  // fixed per episode
  double fading = 1.0;        // Rayleigh draw, per slot
  double bw_share = 1.0;
  double noise_psd = 3.9810717055349565e-21;  // -174 dBm/Hz in W/Hz
  double noise_figure_db = 7.0;
};

struct LatencyBreakdown {
  double comm_s = 0.0;
  double render_s = 0.0;
  double encode_s = 0.0;
  double total_s = 0.0;
  double threshold_s = 0.2;
  double compression = 300.0;
};

struct QoeParams {
  QualityTriple quality_weights{1.0, 2.0, 3.0};
  // beta_th,q = 0.25 * B_q,max by default
  QualityTriple bitrate_thresholds{0.125e6, 0.35e6, 3.1e6};
  double switch_penalty = 0.5;  // lambda
  double qoe_min = 4.0;
  double fairness_weight = 2.0;
  double violation_weight = 2.0;
  double log_base = 0.0;  // 0 means natural log
};

struct UserObservation {
  double rate_bps = 0.0;
  double comm_s = 0.0;
  double encode_s = 0.0;
  double render_s = 0.0;
  double total_s = 0.0;
  TileCounts tiles;
  double qoe = 0.0;
};

inline constexpr int kObsPerUser = 9;
inline constexpr int kActionPerUser = 6;

struct EnvObservation {
  std::vector<UserObservation> users;

  // [rate, T_comm, T_enc, T_rend, T_tot, M_high, M_med, M_low, QoE] per user
  std::vector<double> flatten() const {
    std::vector<double> out;
    out.reserve(users.size() * kObsPerUser);
    for (const auto& u : users) {
      out.push_back(u.rate_bps);
      out.push_back(u.comm_s);
      out.push_back(u.encode_s);
      out.push_back(u.render_s);
      out.push_back(u.total_s);
      out.push_back(static_cast<double>(u.tiles.high));
      out.push_back(static_cast<double>(u.tiles.med));
      out.push_back(static_cast<double>(u.tiles.low));
      out.push_back(u.qoe);
    }
    return out;
  }
};

struct UserAllocation {
  double cpu_share = 0.0;
  double bw_share = 0.0;
  double gpu_share = 0.0;
  QualityTriple ratios;
};

struct EnvAction {
  std::vector<UserAllocation> users;
};

}  // namespace fsdt::env
