#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fsdt/env/physics.hpp"
#include "fsdt/env/types.hpp"
#include "fsdt/gaze/gaze.hpp"

namespace fsdt::env {

struct EnvConfig {
  std::string id = "env";
  RatProfile profile = RatProfile::by_name("UMB/UMi");
  ComputeModel compute;
  QoeParams qoe;
  int n_users = 4;
  int episode_slots = 100;
  QualityTriple max_bitrates{0.5e6, 1.4e6, 12.4e6};
  double compression = 300.0;
  double latency_threshold_s = 0.2;
  double noise_psd = 3.9810717055349565e-21;
  double noise_figure_db = 7.0;
  double gaze_radius_high = 0.8;  // tile widths
  double gaze_radius_med = 1.8;
  // Rayleigh fading coefficient floor; truncates deep fades so per-episode
  // latency means stay bounded.
  double fading_floor = 0.05;
  double qoe_floor = -10.0;  // sentinel clamp for infinite-latency slots

  int state_dim() const { return n_users * kObsPerUser; }
  int action_dim() const { return n_users * kActionPerUser; }
};

// Steppable episodic multi-RAT MEC environment for n_users users. Owns its
// RNG; instances are independent.
class MecEnvironment {
 public:
  MecEnvironment(EnvConfig config, std::vector<gaze::GazeTrace> traces,
                 std::uint64_t seed);

  const EnvConfig& config() const { return config_; }

  // Starts a new episode: redraws user positions, per-episode shadowing and
  // gaze trace windows. Returns the initial observation, computed under an
  // equal-share, mid-ratio baseline allocation.
  EnvObservation reset();

  struct StepResult {
    EnvObservation obs;
    double reward = 0.0;
    bool done = false;
  };
  StepResult step(const std::vector<double>& raw_action);

  int slot() const { return slot_; }
  bool done() const { return slot_ >= config_.episode_slots; }

 private:
  struct UserEpisodeState {
    double distance_m = 1.0;
    double shadowing_db = 0.0;
    std::size_t trace_idx = 0;
    std::size_t trace_offset = 0;
    QualityTriple prev_ratios;
    bool has_prev = false;
  };

  EnvObservation evaluate(const EnvAction& action, bool commit,
                          std::vector<double>* qoes_out);

  EnvConfig config_;
  std::vector<gaze::GazeTrace> traces_;
  std::mt19937_64 rng_;
  std::vector<UserEpisodeState> users_;
  int slot_ = 0;
  bool episode_active_ = false;
};

}  // namespace fsdt::env
