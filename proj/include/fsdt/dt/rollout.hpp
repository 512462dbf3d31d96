#pragma once
// Autoregressive evaluation: the model conditions on a target return-to-go
// and its own past actions while driving a live environment episode.

#include <algorithm>
#include <vector>

#include "fsdt/data/dataset.hpp"
#include "fsdt/dt/batch.hpp"
#include "fsdt/dt/model.hpp"
#include "fsdt/dt/rtg.hpp"
#include "fsdt/env/environment.hpp"

namespace fsdt::dt {

struct RolloutResult {
  data::Trajectory trajectory;
  double total_reward = 0.0;
};

// Predicted sigmoid outputs can round to exactly 0 or 1 in 32-bit float;
// decode_action requires the open interval.
inline double clamp_raw_action(double v) {
  return std::clamp(v, 1e-6, 1.0 - 1e-6);
}

template <class T>
RolloutResult rollout_episode(SplitDtModel<T>& model,
                              env::MecEnvironment& environment,
                              double target_return) {
  const DtConfig& cfg = model.config();
  const int sd = cfg.state_dim, ad = cfg.action_dim;
  const int L = cfg.context_length;
  const int slots = environment.config().episode_slots;

  std::vector<float> states, actions, rewards;
  std::vector<float> rtg_cond;  // conditioning RTG: target minus realized
  states.reserve(static_cast<std::size_t>(slots) * sd);
  actions.reserve(static_cast<std::size_t>(slots) * ad);

  env::EnvObservation obs = environment.reset();
  double remaining = target_return;
  double total = 0.0;

  ContextBatch<T> batch;
  for (int t = 0; t < slots; ++t) {
    const std::vector<double> flat = obs.flatten();
    for (double v : flat) states.push_back(static_cast<float>(v));
    rtg_cond.push_back(static_cast<float>(remaining));
    // placeholder action for the current slot; overwritten after prediction
    actions.resize(static_cast<std::size_t>(t + 1) * ad, 0.0f);

    const int window = std::min(L, t + 1);
    const int start = t + 1 - window;
    const int pad = L - window;
    batch.resize(1, L, sd, ad);
    for (int w = 0; w < window; ++w) {
      const int src = start + w;
      const std::size_t dst = static_cast<std::size_t>(pad + w);
      batch.rtg[dst] = rtg_cond[src];
      batch.timesteps[dst] = std::min(src, cfg.max_timestep - 1);
      batch.valid[dst] = 1;
      std::copy_n(states.data() + static_cast<std::size_t>(src) * sd, sd,
                  batch.states.data() + dst * sd);
      std::copy_n(actions.data() + static_cast<std::size_t>(src) * ad, ad,
                  batch.actions.data() + dst * ad);
    }

    std::vector<double> raw = model.predict_last_action(batch);
    for (double& v : raw) v = clamp_raw_action(v);
    for (int d = 0; d < ad; ++d)
      actions[static_cast<std::size_t>(t) * ad + d] = static_cast<float>(raw[d]);

    auto result = environment.step(raw);
    rewards.push_back(static_cast<float>(result.reward));
    total += result.reward;
    remaining -= result.reward;
    obs = result.obs;
    if (result.done) break;
  }

  RolloutResult out;
  out.trajectory.env_id = environment.config().id;
  out.trajectory.length = static_cast<int>(rewards.size());
  out.trajectory.states = std::move(states);
  out.trajectory.actions = std::move(actions);
  out.trajectory.rewards = std::move(rewards);
  out.trajectory.rtg = compute_rtg<float>(out.trajectory.rewards);
  out.total_reward = total;
  return out;
}

// Mean action MSE over deterministic batches of a held-out dataset,
// evaluation mode (no dropout, no parameter updates).
template <class T>
double evaluate_action_mse(SplitDtModel<T>& model,
                           const data::OfflineDataset& ds, int n_batches,
                           int batch_size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const DtConfig& cfg = model.config();
  double total = 0.0;
  for (int i = 0; i < n_batches; ++i) {
    ContextBatch<T> batch =
        sample_batch<T>(ds, batch_size, cfg.context_length, rng);
    const nn::Tensor<T> pred = model.forward(batch, /*train=*/false);
    const int rows = batch.batch * batch.length;
    double loss = 0.0;
    std::size_t n_valid = 0;
    for (int r = 0; r < rows; ++r) {
      if (!batch.valid[r]) continue;
      ++n_valid;
      for (int d = 0; d < cfg.action_dim; ++d) {
        const std::size_t j = static_cast<std::size_t>(r) * cfg.action_dim + d;
        const double diff = static_cast<double>(pred.v[j]) -
                            static_cast<double>(batch.actions[j]);
        loss += diff * diff;
      }
    }
    total += loss / (static_cast<double>(n_valid) * cfg.action_dim);
  }
  return total / n_batches;
}

}  // namespace fsdt::dt
