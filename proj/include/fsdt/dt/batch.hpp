#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "fsdt/data/dataset.hpp"

namespace fsdt::dt {

// A batch of left-padded length-L context windows.
template <class T>
struct ContextBatch {
  int batch = 0;
  int length = 0;
  int state_dim = 0;
  int action_dim = 0;
  std::vector<T> rtg;           // [B*L]
  std::vector<T> states;        // [B*L*state_dim]
  std::vector<T> actions;       // [B*L*action_dim]
  std::vector<int> timesteps;   // [B*L]
  std::vector<std::uint8_t> valid;  // [B*L], padded positions are 0

  void resize(int b, int l, int sd, int ad) {
    batch = b;
    length = l;
    state_dim = sd;
    action_dim = ad;
    rtg.assign(static_cast<std::size_t>(b) * l, T(0));
    states.assign(static_cast<std::size_t>(b) * l * sd, T(0));
    actions.assign(static_cast<std::size_t>(b) * l * ad, T(0));
    timesteps.assign(static_cast<std::size_t>(b) * l, 0);
    valid.assign(static_cast<std::size_t>(b) * l, 0);
  }
};

// Uniformly samples (trajectory, end-index) pairs — trajectories weighted by
// length — and takes the <=L suffix window ending there, left-padded to L.
template <class T>
ContextBatch<T> sample_batch(const data::OfflineDataset& ds, int batch_size,
                             int context_length, std::mt19937_64& rng) {
  if (ds.empty()) throw std::invalid_argument("cannot sample from empty dataset");
  std::vector<std::size_t> cumulative;
  cumulative.reserve(ds.trajectories.size());
  std::size_t total = 0;
  for (const auto& t : ds.trajectories) {
    total += static_cast<std::size_t>(t.length);
    cumulative.push_back(total);
  }
  std::uniform_int_distribution<std::size_t> pick(0, total - 1);

  ContextBatch<T> out;
  out.resize(batch_size, context_length, ds.state_dim, ds.action_dim);
  for (int b = 0; b < batch_size; ++b) {
    const std::size_t u = pick(rng);
    std::size_t ti = 0;
    while (cumulative[ti] <= u) ++ti;
    const auto& traj = ds.trajectories[ti];
    const int end = static_cast<int>(
        u - (ti == 0 ? 0 : cumulative[ti - 1]));  // inclusive end index
    const int window = std::min(context_length, end + 1);
    const int start = end + 1 - window;
    const int pad = context_length - window;
    for (int w = 0; w < window; ++w) {
      const int l = pad + w;
      const int src = start + w;
      const std::size_t dst = static_cast<std::size_t>(b) * context_length + l;
      out.rtg[dst] = static_cast<T>(traj.rtg[src]);
      out.timesteps[dst] = src;
      out.valid[dst] = 1;
      for (int d = 0; d < ds.state_dim; ++d)
        out.states[dst * ds.state_dim + d] =
            static_cast<T>(traj.states[static_cast<std::size_t>(src) * ds.state_dim + d]);
      for (int d = 0; d < ds.action_dim; ++d)
        out.actions[dst * ds.action_dim + d] =
            static_cast<T>(traj.actions[static_cast<std::size_t>(src) * ds.action_dim + d]);
    }
  }
  return out;
}

}  // namespace fsdt::dt
