#include "fsdt/env/environment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fsdt::env {

MecEnvironment::MecEnvironment(EnvConfig config,
                               std::vector<gaze::GazeTrace> traces,
                               std::uint64_t seed)
    : config_(std::move(config)), traces_(std::move(traces)), rng_(seed) {
  config_.profile.validate();
  if (config_.n_users <= 0) throw std::invalid_argument("n_users must be positive");
  if (traces_.empty()) throw std::invalid_argument("at least one gaze trace required");
  for (const auto& t : traces_)
    if (static_cast<int>(t.size()) < config_.episode_slots)
      throw std::invalid_argument(
          "gaze trace shorter than the episode length");
}

EnvObservation MecEnvironment::reset() {
  users_.assign(config_.n_users, UserEpisodeState{});
  std::uniform_real_distribution<double> upos(0.0, config_.profile.max_dist_m);
  std::normal_distribution<double> shadow(0.0, config_.profile.shadow_sigma_db);
  std::uniform_int_distribution<std::size_t> utrace(0, traces_.size() - 1);
  const double center = config_.profile.max_dist_m / 2.0;
  for (auto& u : users_) {
    const double x = upos(rng_), y = upos(rng_);
    u.distance_m = std::max(1.0, std::hypot(x - center, y - center));
    u.shadowing_db = shadow(rng_);
    u.trace_idx = utrace(rng_);
    const auto len = traces_[u.trace_idx].size();
    const auto max_off = len - static_cast<std::size_t>(config_.episode_slots);
    u.trace_offset =
        max_off == 0 ? 0
                     : std::uniform_int_distribution<std::size_t>(0, max_off)(rng_);
  }
  slot_ = 0;
  episode_active_ = true;

  // baseline allocation for the initial observation: equal shares, mid ratios
  EnvAction baseline;
  baseline.users.resize(config_.n_users);
  for (auto& u : baseline.users) {
    u.cpu_share = u.bw_share = u.gpu_share = 1.0 / config_.n_users;
    u.ratios = {0.1875, 0.375, 0.875};
  }
  return evaluate(baseline, /*commit=*/false, nullptr);
}

MecEnvironment::StepResult MecEnvironment::step(
    const std::vector<double>& raw_action) {
  if (!episode_active_ || done())
    throw std::logic_error("step() on a finished or unstarted episode");
  const EnvAction action = decode_action(raw_action, config_.n_users);
  std::vector<double> qoes;
  StepResult result;
  result.obs = evaluate(action, /*commit=*/true, &qoes);
  result.reward = reward(qoes, action, config_.qoe);
  ++slot_;
  result.done = done();
  return result;
}

EnvObservation MecEnvironment::evaluate(const EnvAction& action, bool commit,
                                        std::vector<double>* qoes_out) {
  EnvObservation obs;
  obs.users.resize(config_.n_users);
  std::exponential_distribution<double> fading_power(1.0);  // g^2 ~ Exp(1)
  const double tx_w = std::pow(10.0, (config_.profile.tx_power_dbm - 30.0) / 10.0);
  const double obs_cap_s = 1e6;  // keeps observations finite under sentinels

  for (int k = 0; k < config_.n_users; ++k) {
    auto& u = users_[k];
    const auto& alloc = action.users[k];
    const auto& frame =
        traces_[u.trace_idx].frames[u.trace_offset + static_cast<std::size_t>(slot_)];
    const auto tiles = gaze::tile_quality_map(
        frame.x, frame.y, config_.gaze_radius_high, config_.gaze_radius_med);

    GopPlan plan;
    plan.tile_counts = {tiles.count_high, tiles.count_med, tiles.count_low};
    plan.resolution_ratios = alloc.ratios;
    plan.max_bitrates = config_.max_bitrates;

    const double g =
        std::max(config_.fading_floor, std::sqrt(fading_power(rng_)));
    const double pl = path_loss_db(config_.profile, u.distance_m, u.shadowing_db);
    const double rate =
        downlink_rate_bps(alloc.bw_share * config_.profile.bandwidth_hz, tx_w,
                          pl, g, config_.noise_psd, config_.noise_figure_db);

    const LatencyBreakdown lat = latencies(
        plan, config_.compute, alloc.cpu_share * config_.compute.cpu_capacity,
        alloc.gpu_share * config_.compute.gpu_capacity, rate,
        config_.compression, config_.latency_threshold_s);

    const QualityTriple prev = u.has_prev ? u.prev_ratios : alloc.ratios;
    double q = qoe(plan, prev, lat, config_.qoe);
    if (!std::isfinite(q)) q = config_.qoe_floor;  // infinite-latency sentinel
    q = std::max(q, config_.qoe_floor);

    auto& uo = obs.users[k];
    uo.rate_bps = rate;
    uo.comm_s = std::min(lat.comm_s, obs_cap_s);
    uo.encode_s = std::min(lat.encode_s, obs_cap_s);
    uo.render_s = std::min(lat.render_s, obs_cap_s);
    uo.total_s = std::min(lat.total_s, obs_cap_s);
    uo.tiles = plan.tile_counts;
    uo.qoe = q;
    if (qoes_out) qoes_out->push_back(q);
    if (commit) {
      u.prev_ratios = alloc.ratios;
      u.has_prev = true;
    }
  }
  return obs;
}

}  // namespace fsdt::env
