#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "fsdt/env/environment.hpp"
#include "fsdt/env/physics.hpp"
#include "fsdt/gaze/gaze.hpp"

using namespace fsdt;
using namespace fsdt::env;

TEST_CASE("close-in path loss reference values") {
  RatProfile p = RatProfile::by_name("UMB/UMi");
  REQUIRE(p.carrier_hz == 6.75e9);
  REQUIRE(p.ple == 2.56);

  // free-space term at d0 = 1 m, f = 6.75 GHz
  CHECK(path_loss_db(p, 1.0, 0.0) == doctest::Approx(49.03).epsilon(1e-3));
  // plus 10 * 2.56 * log10(100) = 51.2 dB at 100 m
  CHECK(path_loss_db(p, 100.0, 0.0) == doctest::Approx(100.23).epsilon(1e-3));
  // shadowing is additive in dB
  CHECK(path_loss_db(p, 100.0, 5.0) ==
        doctest::Approx(path_loss_db(p, 100.0, 0.0) + 5.0));
  // monotone in distance
  CHECK(path_loss_db(p, 50.0, 0.0) < path_loss_db(p, 51.0, 0.0));
  CHECK_THROWS_AS(path_loss_db(p, 0.5, 0.0), std::domain_error);
}

TEST_CASE("Shannon rate reference value and properties") {
  const double noise_psd = 3.9810717055349565e-21;  // -174 dBm/Hz
  // B = 50 MHz, P = 2 W, PL = 100 dB, unit fading, NF = 7 dB -> ~3.8e8 bit/s
  const double r =
      downlink_rate_bps(50e6, 2.0, 100.0, 1.0, noise_psd, 7.0);
  CHECK(r == doctest::Approx(3.8e8).epsilon(0.02));
  CHECK(r > 0.0);
  CHECK(std::isfinite(r));

  // zero fading -> log2(1 + 0) = 0; zero bandwidth -> 0 by convention
  CHECK(downlink_rate_bps(50e6, 2.0, 100.0, 0.0, noise_psd, 7.0) == 0.0);
  CHECK(downlink_rate_bps(0.0, 2.0, 100.0, 1.0, noise_psd, 7.0) == 0.0);

  // strictly increasing in transmit power
  double prev = 0.0;
  for (double p = 0.5; p <= 4.0; p += 0.5) {
    const double cur = downlink_rate_bps(50e6, p, 100.0, 1.0, noise_psd, 7.0);
    CHECK(cur > prev);
    prev = cur;
  }
}

TEST_CASE("GoP data size") {
  GopPlan plan;
  plan.tile_counts = {16, 0, 0};
  plan.resolution_ratios = {1.0, 1.0, 1.0};
  plan.max_bitrates = {0.5e6, 1.4e6, 1e6};  // beta_high = 1e6 bits/tile
  const GopDataSize all_high = gop_data_size(plan, 16);
  CHECK(all_high.total_bits == doctest::Approx(2.56e8));
  CHECK(all_high.per_quality_bits.high == doctest::Approx(2.56e8));
  CHECK(all_high.per_quality_bits.med == 0.0);

  plan.tile_counts = {0, 0, 0};
  CHECK(gop_data_size(plan, 16).total_bits == 0.0);

  // mixed plan against an independent hand sum
  plan.tile_counts = {4, 9, 3};
  plan.resolution_ratios = {0.1875, 0.375, 0.875};
  plan.max_bitrates = {0.5e6, 1.4e6, 12.4e6};
  const GopDataSize mixed = gop_data_size(plan, 16);
  const double want_low = 3 * 0.5e6 * 0.1875 * 16;
  const double want_med = 9 * 1.4e6 * 0.375 * 16;
  const double want_high = 4 * 12.4e6 * 0.875 * 16;
  CHECK(mixed.per_quality_bits.low == doctest::Approx(want_low));
  CHECK(mixed.per_quality_bits.med == doctest::Approx(want_med));
  CHECK(mixed.per_quality_bits.high == doctest::Approx(want_high));
  CHECK(mixed.total_bits == doctest::Approx(want_low + want_med + want_high));
}

TEST_CASE("latency components") {
  ComputeModel compute;
  GopPlan plan;
  plan.tile_counts = {16, 0, 0};
  plan.resolution_ratios = {1.0, 1.0, 1.0};
  plan.max_bitrates = {0.5e6, 1.4e6, 12.4e6};

  // T_comm = D / (C_r * R): all-high plan gives D = 16*12.4e6*16 bits
  const double d_bits = 16 * 12.4e6 * 16;
  LatencyBreakdown lat =
      latencies(plan, compute, 15e9, 15e9, 1.6e9, 300.0, 0.2);
  CHECK(lat.comm_s == doctest::Approx(d_bits / (300.0 * 1.6e9)));
  // T_rend = gamma_gpu * pixels / f_gpu, pixels = F * M_high * p_high
  const double pixels = 16.0 * 16 * 518400.0;
  CHECK(lat.render_s == doctest::Approx(1.0 * pixels / 15e9));
  // T_enc charges the compressed bits at the per-quality cycle cost
  CHECK(lat.encode_s == doctest::Approx(180.0 * (d_bits / 300.0) / 15e9));
  CHECK(lat.total_s == doctest::Approx(lat.comm_s + lat.render_s + lat.encode_s));

  // the spec's worked example: D = 7.8e8 bits at R = 1.6e9 -> ~1.6 ms
  GopPlan scaled = plan;
  scaled.max_bitrates.high = 7.8e8 / (16.0 * 16.0);
  LatencyBreakdown ex = latencies(scaled, compute, 15e9, 15e9, 1.6e9, 300.0, 0.2);
  CHECK(ex.comm_s == doctest::Approx(1.625e-3).epsilon(1e-6));
  // and P = 5.46e7 pixels at 1.5e10 pixel/s -> ~3.6 ms
  GopPlan few = plan;
  few.tile_counts = {0, 0, 0};  // rebuild the pixel count from mixed tiles
  few.tile_counts.med = 7;     // 7 * 129600 * 16 = 1.45e7 px; scale via gpu cap
  LatencyBreakdown rend = latencies(few, compute, 15e9, 1.5e10, 1.6e9, 300.0, 0.2);
  CHECK(rend.render_s ==
        doctest::Approx(7.0 * 129600.0 * 16.0 / 1.5e10).epsilon(1e-12));
  CHECK(5.46e7 / 1.5e10 == doctest::Approx(3.64e-3).epsilon(1e-2));

  // zero plan -> zero latency
  GopPlan none;
  none.tile_counts = {0, 0, 0};
  LatencyBreakdown zero = latencies(none, compute, 15e9, 15e9, 1.6e9, 300.0, 0.2);
  CHECK(zero.total_s == 0.0);

  // zero capacity with pending work -> infinite sentinel
  LatencyBreakdown inf_enc = latencies(plan, compute, 0.0, 15e9, 1.6e9, 300.0, 0.2);
  CHECK(std::isinf(inf_enc.encode_s));
  LatencyBreakdown inf_comm = latencies(plan, compute, 15e9, 15e9, 0.0, 300.0, 0.2);
  CHECK(std::isinf(inf_comm.comm_s));
}

TEST_CASE("QoE reference points") {
  QoeParams params;
  GopPlan plan;
  plan.tile_counts = {16, 0, 0};
  plan.resolution_ratios = {0.1875, 0.375, 1.0};
  plan.max_bitrates = {0.5e6, 1.4e6, 12.4e6};

  // latency at the threshold with unchanged ratios: both terms vanish
  LatencyBreakdown at_th;
  at_th.total_s = 0.2;
  at_th.threshold_s = 0.2;
  CHECK(qoe(plan, plan.resolution_ratios, at_th, params) ==
        doctest::Approx(0.0));

  // all tiles high with beta = beta_th and zero latency: S = 3 ln 2
  QoeParams p2 = params;
  p2.bitrate_thresholds.high = 12.4e6;  // makes beta/beta_th = 1
  LatencyBreakdown zero;
  zero.total_s = 0.0;
  zero.threshold_s = 0.2;
  CHECK(qoe(plan, plan.resolution_ratios, zero, p2) ==
        doctest::Approx(3.0 * std::log(2.0)).epsilon(1e-12));

  // switch penalty: changing every ratio by delta costs lambda * 3 * delta
  QualityTriple prev = plan.resolution_ratios;
  prev.low += 0.05;
  prev.med -= 0.05;
  prev.high -= 0.05;
  CHECK(qoe(plan, prev, zero, p2) ==
        doctest::Approx(3.0 * std::log(2.0) - 0.5 * 0.15).epsilon(1e-9));

  // no tiles -> S = 0
  GopPlan none;
  none.tile_counts = {0, 0, 0};
  none.resolution_ratios = plan.resolution_ratios;
  CHECK(qoe(none, none.resolution_ratios, zero, params) == doctest::Approx(0.0));

  CHECK_THROWS_AS(qoe(plan, prev, LatencyBreakdown{0, 0, 0, 0, 0.0, 300.0},
                      params),
                  std::domain_error);
}

TEST_CASE("QoE monotonicity properties") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  QoeParams params;
  for (int i = 0; i < 10000; ++i) {
    GopPlan plan;
    const int high = static_cast<int>(u(rng) * 16);
    const int med = static_cast<int>(u(rng) * (16 - high));
    plan.tile_counts = {high, med, 16 - high - med};
    plan.resolution_ratios = {0.125 + 0.125 * u(rng), 0.25 + 0.25 * u(rng),
                              0.75 + 0.25 * u(rng)};
    LatencyBreakdown a, b;
    a.threshold_s = b.threshold_s = 0.2;
    a.total_s = 0.2 * u(rng);
    b.total_s = a.total_s + 0.01 + 0.1 * u(rng);

    // more latency never helps (S >= 0 whenever any tile is requested)
    CHECK(qoe(plan, plan.resolution_ratios, b, params) <=
          qoe(plan, plan.resolution_ratios, a, params) + 1e-12);

    // higher resolution ratios never hurt the quality score at equal latency
    GopPlan richer = plan;
    richer.resolution_ratios.low = std::min(0.25, plan.resolution_ratios.low + 0.01);
    richer.resolution_ratios.med = std::min(0.5, plan.resolution_ratios.med + 0.01);
    richer.resolution_ratios.high = std::min(1.0, plan.resolution_ratios.high + 0.01);
    LatencyBreakdown half;
    half.threshold_s = 0.2;
    half.total_s = 0.1;
    CHECK(qoe(richer, richer.resolution_ratios, half, params) >=
          qoe(plan, plan.resolution_ratios, half, params) - 1e-12);
  }
}

TEST_CASE("action decoding") {
  std::vector<double> raw(24, 0.5);
  const EnvAction a = decode_action(raw, 4);
  REQUIRE(a.users.size() == 4);
  for (const auto& u : a.users) {
    // raw shares 0.5 x 4 sum to 2, rescaled onto the simplex
    CHECK(u.cpu_share == doctest::Approx(0.25));
    CHECK(u.bw_share == doctest::Approx(0.25));
    CHECK(u.gpu_share == doctest::Approx(0.25));
    CHECK(u.ratios.high == doctest::Approx(0.875));
    CHECK(u.ratios.med == doctest::Approx(0.375));
    CHECK(u.ratios.low == doctest::Approx(0.1875));
  }

  // shares already summing below one are untouched
  std::vector<double> small(24, 0.5);
  for (int k = 0; k < 4; ++k)
    small[k * kActionPerUser + 0] = 0.2;  // cpu column sums to 0.8
  const EnvAction b = decode_action(small, 4);
  for (const auto& u : b.users) CHECK(u.cpu_share == doctest::Approx(0.2));

  // random property: shares sum to <= 1, ratios inside the quality intervals
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u01(1e-9, 1.0 - 1e-9);
  for (int i = 0; i < 2000; ++i) {
    std::vector<double> r(24);
    for (auto& v : r) v = u01(rng);
    const EnvAction act = decode_action(r, 4);
    double cpu = 0, bw = 0, gpu = 0;
    for (const auto& u : act.users) {
      cpu += u.cpu_share;
      bw += u.bw_share;
      gpu += u.gpu_share;
      CHECK(u.ratios.high > 0.75);
      CHECK(u.ratios.high < 1.0);
      CHECK(u.ratios.med > 0.25);
      CHECK(u.ratios.med < 0.5);
      CHECK(u.ratios.low > 0.125);
      CHECK(u.ratios.low < 0.25);
    }
    CHECK(cpu <= 1.0 + 1e-12);
    CHECK(bw <= 1.0 + 1e-12);
    CHECK(gpu <= 1.0 + 1e-12);
  }

  CHECK_THROWS_AS(decode_action(std::vector<double>(23, 0.5), 4),
                  std::invalid_argument);
  std::vector<double> edge(24, 0.5);
  edge[3] = 1.0;
  CHECK_THROWS_AS(decode_action(edge, 4), std::domain_error);
  edge[3] = 0.0;
  CHECK_THROWS_AS(decode_action(edge, 4), std::domain_error);
}

TEST_CASE("reward composition") {
  QoeParams params;  // qoe_min = 4, weights 2/2
  EnvAction equal;
  equal.users.resize(4);
  for (auto& u : equal.users) {
    u.cpu_share = u.bw_share = u.gpu_share = 0.25;
  }
  // equal shares: zero fairness penalty; QoEs (3,5,4,2) have two violations
  const double r = reward({3.0, 5.0, 4.0, 2.0}, equal, params);
  CHECK(r == doctest::Approx(14.0 - 2.0 * 2));

  // uneven cpu shares (0.5, 0.5, 0, 0): population std = 0.25
  EnvAction uneven = equal;
  uneven.users[0].cpu_share = uneven.users[1].cpu_share = 0.5;
  uneven.users[2].cpu_share = uneven.users[3].cpu_share = 0.0;
  const double r2 = reward({5.0, 5.0, 5.0, 5.0}, uneven, params);
  CHECK(r2 == doctest::Approx(20.0 - 2.0 * 0.25));

  CHECK_THROWS_AS(reward({1.0}, equal, params), std::invalid_argument);
}

namespace {

std::vector<gaze::GazeTrace> test_traces(int n, int len, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<gaze::GazeTrace> traces;
  for (int i = 0; i < n; ++i) traces.push_back(gaze::synth_trace(len, rng, 0.03));
  return traces;
}

}  // namespace

TEST_CASE("environment episodes: shape, determinism, termination") {
  EnvConfig cfg;
  cfg.episode_slots = 6;
  auto traces = test_traces(3, 20, 7);

  MecEnvironment env_a(cfg, traces, 99);
  MecEnvironment env_b(cfg, traces, 99);

  EnvObservation oa = env_a.reset();
  EnvObservation ob = env_b.reset();
  CHECK(oa.flatten().size() == 36);
  CHECK(oa.flatten() == ob.flatten());

  std::mt19937_64 act_rng(5);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int t = 0; t < cfg.episode_slots; ++t) {
    std::vector<double> raw(24);
    for (auto& v : raw) v = u(act_rng);
    auto ra = env_a.step(raw);
    auto rb = env_b.step(raw);
    CHECK(ra.reward == rb.reward);
    CHECK(ra.obs.flatten() == rb.obs.flatten());
    CHECK(ra.done == (t == cfg.episode_slots - 1));
    // tile counts in the observation sum to 16 per user
    for (const auto& uo : ra.obs.users)
      CHECK(uo.tiles.total() == 16);
    // total latency is the sum of its parts (all finite here)
    for (const auto& uo : ra.obs.users)
      if (uo.total_s < 1e6)
        CHECK(uo.total_s ==
              doctest::Approx(uo.comm_s + uo.encode_s + uo.render_s));
  }
  CHECK(env_a.done());
  CHECK_THROWS_AS(env_a.step(std::vector<double>(24, 0.5)), std::logic_error);

  // reset starts a fresh episode
  env_a.reset();
  CHECK(env_a.slot() == 0);
  CHECK_NOTHROW(env_a.step(std::vector<double>(24, 0.5)));

  // different seeds diverge
  MecEnvironment env_c(cfg, traces, 100);
  CHECK(env_c.reset().flatten() != oa.flatten());
}

TEST_CASE("environment construction guards") {
  EnvConfig cfg;
  cfg.episode_slots = 50;
  CHECK_THROWS_AS(MecEnvironment(cfg, {}, 1), std::invalid_argument);
  // traces shorter than the episode are rejected
  CHECK_THROWS_AS(MecEnvironment(cfg, test_traces(1, 10, 2), 1),
                  std::invalid_argument);
  EnvConfig bad = cfg;
  bad.n_users = 0;
  CHECK_THROWS_AS(MecEnvironment(bad, test_traces(1, 60, 2), 1),
                  std::invalid_argument);
}
