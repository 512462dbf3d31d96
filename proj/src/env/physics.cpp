#include "fsdt/env/physics.hpp"

#include <cmath>
#include <limits>

namespace fsdt::env {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
}  // namespace

const std::vector<RatProfile>& RatProfile::builtins() {
  static const std::vector<RatProfile> profiles = {
      {"UMB/UMi", 200e6, 6.75e9, 2.56, 6.53, 230.0, 33.0},
      {"UMB/InH", 200e6, 6.75e9, 2.72, 9.21, 65.0, 33.0},
      {"Sub6GHz/UMi", 100e6, 2.90e9, 2.90, 2.90, 230.0, 30.0},
      {"Sub6GHz/InH", 100e6, 2.90e9, 3.10, 6.50, 65.0, 30.0},
      {"Wi-Fi/InH", 160e6, 2.40e9, 2.52, 5.75, 65.0, 24.0},
  };
  return profiles;
}

const RatProfile& RatProfile::by_name(const std::string& name) {
  for (const auto& p : builtins())
    if (p.name == name) return p;
  throw std::invalid_argument("unknown RAT profile: " + name);
}

double path_loss_db(const RatProfile& profile, double distance_m,
                    double shadowing_db) {
  if (distance_m < kReferenceDist)
    throw std::domain_error("distance below reference distance d0 = 1 m");
  const double fspl =
      20.0 * std::log10(4.0 * M_PI * profile.carrier_hz * kReferenceDist /
                        kSpeedOfLight);
  return fspl + 10.0 * profile.ple * std::log10(distance_m / kReferenceDist) +
         shadowing_db;
}

double downlink_rate_bps(double bandwidth_hz, double tx_power_w, double pl_db,
                         double fading, double noise_psd,
                         double noise_figure_db) {
  if (bandwidth_hz <= 0.0) return 0.0;
  const double h = std::pow(10.0, -pl_db / 10.0);
  const double noise_w =
      noise_psd * bandwidth_hz * db_to_linear(noise_figure_db);
  const double snr = tx_power_w * fading * fading * h / noise_w;
  return bandwidth_hz * std::log2(1.0 + snr);
}

double downlink_rate(const LinkState& link, const RatProfile& profile) {
  const double pl =
      path_loss_db(profile, link.distance_m, link.shadowing_db);
  return downlink_rate_bps(link.bw_share * profile.bandwidth_hz,
                           dbm_to_watts(profile.tx_power_dbm), pl, link.fading,
                           link.noise_psd, link.noise_figure_db);
}

GopDataSize gop_data_size(const GopPlan& plan, int frames) {
  GopDataSize d;
  const double f = static_cast<double>(frames);
  d.per_quality_bits.low = plan.tile_counts.low *
                           plan.max_bitrates.low * plan.resolution_ratios.low * f;
  d.per_quality_bits.med = plan.tile_counts.med *
                           plan.max_bitrates.med * plan.resolution_ratios.med * f;
  d.per_quality_bits.high = plan.tile_counts.high * plan.max_bitrates.high *
                            plan.resolution_ratios.high * f;
  d.total_bits =
      d.per_quality_bits.low + d.per_quality_bits.med + d.per_quality_bits.high;
  return d;
}

LatencyBreakdown latencies(const GopPlan& plan, const ComputeModel& compute,
                           double cpu_alloc_cps, double gpu_alloc_pps,
                           double rate_bps, double compression,
                           double threshold_s) {
  LatencyBreakdown lat;
  lat.threshold_s = threshold_s;
  lat.compression = compression;

  const GopDataSize d = gop_data_size(plan, compute.frames_per_gop);
  const double pixels =
      compute.frames_per_gop *
      (plan.tile_counts.low * compute.pixels_per_tile.low +
       plan.tile_counts.med * compute.pixels_per_tile.med +
       plan.tile_counts.high * compute.pixels_per_tile.high);

  if (d.total_bits > 0.0) {
    lat.comm_s = (compression * rate_bps > 0.0)
                     ? d.total_bits / (compression * rate_bps)
                     : kInf;
    // per-quality CPU cost mixed by data share; encoding charged on
    // compressed bits D / C_r
    const double gamma_eff =
        (compute.cpu_cycles_per_bit.low * d.per_quality_bits.low +
         compute.cpu_cycles_per_bit.med * d.per_quality_bits.med +
         compute.cpu_cycles_per_bit.high * d.per_quality_bits.high) /
        d.total_bits;
    lat.encode_s = (cpu_alloc_cps > 0.0)
                       ? gamma_eff * (d.total_bits / compression) / cpu_alloc_cps
                       : kInf;
  }
  if (pixels > 0.0)
    lat.render_s = (gpu_alloc_pps > 0.0)
                       ? compute.gpu_cost * pixels / gpu_alloc_pps
                       : kInf;
  lat.total_s = lat.comm_s + lat.render_s + lat.encode_s;
  return lat;
}

double qoe(const GopPlan& plan, const QualityTriple& prev_ratios,
           const LatencyBreakdown& lat, const QoeParams& params) {
  if (lat.threshold_s <= 0.0)
    throw std::domain_error("latency threshold must be positive");
  const double m_total = plan.tile_counts.total();
  double s = 0.0;
  if (m_total > 0) {
    auto log_fn = [&params](double x) {
      return params.log_base > 0.0 ? std::log(x) / std::log(params.log_base)
                                   : std::log(x);
    };
    auto term = [&](double w, int m, double beta, double beta_th) {
      return (w * m / m_total) * log_fn(1.0 + beta / beta_th);
    };
    s += term(params.quality_weights.low, plan.tile_counts.low,
              plan.max_bitrates.low * plan.resolution_ratios.low,
              params.bitrate_thresholds.low);
    s += term(params.quality_weights.med, plan.tile_counts.med,
              plan.max_bitrates.med * plan.resolution_ratios.med,
              params.bitrate_thresholds.med);
    s += term(params.quality_weights.high, plan.tile_counts.high,
              plan.max_bitrates.high * plan.resolution_ratios.high,
              params.bitrate_thresholds.high);
  }
  const double r_amp = std::abs(plan.resolution_ratios.low - prev_ratios.low) +
                       std::abs(plan.resolution_ratios.med - prev_ratios.med) +
                       std::abs(plan.resolution_ratios.high - prev_ratios.high);
  return (1.0 - lat.total_s / lat.threshold_s) * s -
         params.switch_penalty * r_amp;
}

EnvAction decode_action(const std::vector<double>& raw, int n_users) {
  if (static_cast<int>(raw.size()) != n_users * kActionPerUser)
    throw std::invalid_argument("raw action has wrong length");
  for (double v : raw)
    if (!(v > 0.0 && v < 1.0))
      throw std::domain_error("raw action value outside (0,1)");

  EnvAction action;
  action.users.resize(n_users);
  double cpu_sum = 0.0, bw_sum = 0.0, gpu_sum = 0.0;
  for (int k = 0; k < n_users; ++k) {
    const double* r = raw.data() + k * kActionPerUser;
    auto& u = action.users[k];
    u.cpu_share = r[0];
    u.bw_share = r[1];
    u.gpu_share = r[2];
    // layout per user: f_sh, b_sh, g_sh, r_high, r_med, r_low
    u.ratios.high = 0.75 + r[3] * 0.25;
    u.ratios.med = 0.25 + r[4] * 0.25;
    u.ratios.low = 0.125 + r[5] * 0.125;
    cpu_sum += u.cpu_share;
    bw_sum += u.bw_share;
    gpu_sum += u.gpu_share;
  }
  // project onto the simplex-capped box: rescale a resource column only when
  // its sum exceeds 1
  if (cpu_sum > 1.0)
    for (auto& u : action.users) u.cpu_share /= cpu_sum;
  if (bw_sum > 1.0)
    for (auto& u : action.users) u.bw_share /= bw_sum;
  if (gpu_sum > 1.0)
    for (auto& u : action.users) u.gpu_share /= gpu_sum;
  return action;
}

namespace {
double population_std(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return std::sqrt(var / static_cast<double>(xs.size()));
}
}  // namespace

double reward(const std::vector<double>& qoes, const EnvAction& action,
              const QoeParams& params) {
  if (qoes.size() != action.users.size())
    throw std::invalid_argument("one QoE per user required");
  double qoe_sum = 0.0;
  int violations = 0;
  for (double q : qoes) {
    qoe_sum += q;
    if (q < params.qoe_min) ++violations;
  }
  std::vector<double> cpu, bw, gpu;
  for (const auto& u : action.users) {
    cpu.push_back(u.cpu_share);
    bw.push_back(u.bw_share);
    gpu.push_back(u.gpu_share);
  }
  const double fairness =
      population_std(cpu) + population_std(bw) + population_std(gpu);
  return qoe_sum - params.fairness_weight * fairness -
         params.violation_weight * violations;
}

}  // namespace fsdt::env
