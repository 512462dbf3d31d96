#pragma once

#include <stdexcept>
#include <vector>

namespace fsdt::dt {

struct DtConfig {
  int n_heads = 4;
  int n_blocks = 6;
  int hidden_dim = 256;
  int context_length = 50;  // L: number of (RTG, state, action) tuples
  int state_dim = 36;
  int action_dim = 24;
  int max_timestep = 100;
  int mlp_ratio = 4;
  double dropout = 0.1;

  // fixed input scaling; keeps physical-unit features in a trainable range
  double rtg_scale = 1000.0;

  // only the action head carries loss by default
  double loss_weight_action = 1.0;
  double loss_weight_state = 0.0;
  double loss_weight_return = 0.0;

  void validate() const {
    if (hidden_dim % n_heads != 0)
      throw std::invalid_argument("hidden_dim must be divisible by n_heads");
    if (context_length <= 0 || n_blocks <= 0 || max_timestep <= 0)
      throw std::invalid_argument("invalid DT config");
  }

  // Per-feature multipliers for the state input. The 9-feature per-user
  // pattern is [rate, 4 delays, 3 tile counts, QoE].
  std::vector<double> state_scale() const {
    static const double pattern[9] = {1e-9, 5.0,       5.0,       5.0, 5.0,
                                      1.0 / 16, 1.0 / 16, 1.0 / 16, 0.1};
    std::vector<double> s(state_dim, 1.0);
    if (state_dim % 9 == 0)
      for (int i = 0; i < state_dim; ++i) s[i] = pattern[i % 9];
    return s;
  }
};

}  // namespace fsdt::dt
