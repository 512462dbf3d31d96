#pragma once
// Multi-RAT MEC physical model: channel, compute, QoE, action decoding and
// the per-slot reward.

#include <vector>

#include "fsdt/env/types.hpp"

namespace fsdt::env {

inline constexpr double kSpeedOfLight = 2.998e8;  // m/s
inline constexpr double kReferenceDist = 1.0;     // d0, meters

// Close-in path loss with log-normal shadowing, in dB.
double path_loss_db(const RatProfile& profile, double distance_m,
                    double shadowing_db);

// Shannon rate in bits/s from explicit link quantities; pl_db is the path
// loss in dB, tx power in watts. Zero allocated bandwidth returns 0 by
// convention (the SNR denominator is never evaluated with B = 0).
double downlink_rate_bps(double bandwidth_hz, double tx_power_w, double pl_db,
                         double fading, double noise_psd,
                         double noise_figure_db);
double downlink_rate(const LinkState& link, const RatProfile& profile);

struct GopDataSize {
  QualityTriple per_quality_bits;  // d_q = M_q * beta_q * F
  double total_bits = 0.0;
};
GopDataSize gop_data_size(const GopPlan& plan, int frames);

// Allocated capacities are the per-user shares already applied
// (cpu_alloc = f_sh * f_cpu, ...). Zero capacity with pending work yields an
// infinite-latency sentinel.
LatencyBreakdown latencies(const GopPlan& plan, const ComputeModel& compute,
                           double cpu_alloc_cps, double gpu_alloc_pps,
                           double rate_bps, double compression,
                           double threshold_s);

// QoE = (1 - T_tot/T_th) * S - lambda * R_amp
double qoe(const GopPlan& plan, const QualityTriple& prev_ratios,
           const LatencyBreakdown& lat, const QoeParams& params);

// Raw values in (0,1): ratios mapped affinely into the quality-limit
// intervals; shares normalized per resource when the column sum exceeds 1.
EnvAction decode_action(const std::vector<double>& raw, int n_users = 4);

// r = sum_k QoE_k - w_fair * (sigma_f + sigma_b + sigma_g) - w_viol * V
double reward(const std::vector<double>& qoes, const EnvAction& action,
              const QoeParams& params);

}  // namespace fsdt::env
