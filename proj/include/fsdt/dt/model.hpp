#pragma once
// Split decision transformer: modality + timestep embeddings (edge), GPT
// style causal decoder (cloud), prediction heads (edge). The three parameter
// groups live in separate ParamSets so federated split training can freeze
// and exchange them independently.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "fsdt/dt/batch.hpp"
#include "fsdt/dt/config.hpp"
#include "fsdt/nn/checkpoint.hpp"
#include "fsdt/nn/layers.hpp"

namespace fsdt::dt {

template <class T>
class SplitDtModel {
 public:
  SplitDtModel(const DtConfig& cfg, std::uint64_t init_seed)
      : cfg_(cfg), dropout_rng_(init_seed ^ 0x9e3779b97f4a7c15ull) {
    cfg_.validate();
    nn::Rng init_rng(init_seed);
    const int h = cfg_.hidden_dim;
    phi_r_ = nn::Dense<T>(embed_params_, "phi_r", 1, h, init_rng);
    phi_s_ = nn::Dense<T>(embed_params_, "phi_s", cfg_.state_dim, h, init_rng);
    phi_a_ = nn::Dense<T>(embed_params_, "phi_a", cfg_.action_dim, h, init_rng);
    timestep_ = nn::EmbeddingTable<T>(embed_params_, "timestep",
                                      cfg_.max_timestep, h, init_rng);
    embed_ln_ = nn::LayerNorm<T>(embed_params_, "ln", h);
    blocks_.reserve(cfg_.n_blocks);
    for (int i = 0; i < cfg_.n_blocks; ++i)
      blocks_.emplace_back(decoder_params_, "block" + std::to_string(i), h,
                           cfg_.n_heads, cfg_.mlp_ratio, cfg_.dropout,
                           init_rng);
    action_head_ = nn::Dense<T>(predict_params_, "action", h, cfg_.action_dim,
                                init_rng);
    state_head_ = nn::Dense<T>(predict_params_, "state", h, cfg_.state_dim,
                               init_rng);
    return_head_ = nn::Dense<T>(predict_params_, "return", h, 1, init_rng);
    state_scale_ = cfg_.state_scale();
  }

  const DtConfig& config() const { return cfg_; }
  nn::ParamSet<T>& embed_params() { return embed_params_; }
  nn::ParamSet<T>& decoder_params() { return decoder_params_; }
  nn::ParamSet<T>& predict_params() { return predict_params_; }
  const nn::ParamSet<T>& embed_params() const { return embed_params_; }
  const nn::ParamSet<T>& decoder_params() const { return decoder_params_; }
  const nn::ParamSet<T>& predict_params() const { return predict_params_; }

  void seed_dropout(std::uint64_t s) { dropout_rng_.seed(s); }

  // Embeds the batch into the interleaved (RTG, state, action) token stream
  // and runs decoder + heads. Returns predicted raw actions [B*L, action_dim].
  nn::Tensor<T> forward(const ContextBatch<T>& batch, bool train) {
    const int B = batch.batch, L = batch.length, h = cfg_.hidden_dim;
    const int rows = B * L, Tt = 3 * L;

    nn::Tensor<T> rtg_in({rows, 1});
    nn::Tensor<T> st_in({rows, cfg_.state_dim});
    nn::Tensor<T> ac_in({rows, cfg_.action_dim});
    const T inv_rtg = static_cast<T>(1.0 / cfg_.rtg_scale);
    for (int r = 0; r < rows; ++r) {
      rtg_in.v[r] = batch.rtg[r] * inv_rtg;
      for (int d = 0; d < cfg_.state_dim; ++d)
        st_in.v[static_cast<std::size_t>(r) * cfg_.state_dim + d] =
            batch.states[static_cast<std::size_t>(r) * cfg_.state_dim + d] *
            static_cast<T>(state_scale_[d]);
      for (int d = 0; d < cfg_.action_dim; ++d)
        ac_in.v[static_cast<std::size_t>(r) * cfg_.action_dim + d] =
            batch.actions[static_cast<std::size_t>(r) * cfg_.action_dim + d];
    }

    nn::Tensor<T> e_r = phi_r_.forward(rtg_in);
    nn::Tensor<T> e_s = phi_s_.forward(st_in);
    nn::Tensor<T> e_a = phi_a_.forward(ac_in);

    // interleave (R, s, a) per slot, then add timestep embeddings
    nn::Tensor<T> tokens({B * Tt, h});
    token_timesteps_.assign(static_cast<std::size_t>(B) * Tt, 0);
    token_valid_.assign(static_cast<std::size_t>(B) * Tt, 0);
    for (int b = 0; b < B; ++b)
      for (int l = 0; l < L; ++l) {
        const std::size_t slot = static_cast<std::size_t>(b) * L + l;
        const std::size_t tok = (static_cast<std::size_t>(b) * Tt) + 3 * l;
        std::copy_n(e_r.data() + slot * h, h, tokens.data() + tok * h);
        std::copy_n(e_s.data() + slot * h, h, tokens.data() + (tok + 1) * h);
        std::copy_n(e_a.data() + slot * h, h, tokens.data() + (tok + 2) * h);
        for (int k = 0; k < 3; ++k) {
          token_timesteps_[tok + k] = batch.timesteps[slot];
          token_valid_[tok + k] = batch.valid[slot];
        }
      }
    nn::Tensor<T> pi = timestep_.forward(token_timesteps_);
    kernels::add(tokens.data(), tokens.data(), pi.data(), tokens.size());
    nn::Tensor<T> x = embed_ln_.forward(tokens);

    B_ = B;
    L_ = L;
    for (auto& block : blocks_)
      x = block.forward(x, B, Tt, token_valid_, train, dropout_rng_);

    // contextualized state tokens drive the action and return heads; action
    // tokens drive the next-state head
    nn::Tensor<T> v_s({rows, h});
    nn::Tensor<T> v_a({rows, h});
    for (int b = 0; b < B; ++b)
      for (int l = 0; l < L; ++l) {
        const std::size_t slot = static_cast<std::size_t>(b) * L + l;
        const std::size_t tok = static_cast<std::size_t>(b) * Tt + 3 * l;
        std::copy_n(x.data() + (tok + 1) * h, h, v_s.data() + slot * h);
        std::copy_n(x.data() + (tok + 2) * h, h, v_a.data() + slot * h);
      }

    pred_actions_ = action_sig_.forward(action_head_.forward(v_s));
    if (cfg_.loss_weight_state > 0.0)
      pred_states_ = state_head_.forward(v_a);
    if (cfg_.loss_weight_return > 0.0)
      pred_returns_ = return_head_.forward(v_s);
    return pred_actions_;
  }

  // MSE between predicted and dataset raw actions over unpadded positions
  // (auxiliary heads weighted per config). Gradients are accumulated into the
  // three param sets; the caller decides which sets to step.
  double loss_and_backward(const ContextBatch<T>& batch, bool train) {
    forward(batch, train);
    const int B = batch.batch, L = batch.length, h = cfg_.hidden_dim;
    const int rows = B * L, Tt = 3 * L, ad = cfg_.action_dim;

    std::size_t n_valid = 0;
    for (int r = 0; r < rows; ++r) n_valid += batch.valid[r];
    if (n_valid == 0) throw std::invalid_argument("batch has no valid positions");

    double loss = 0.0;
    nn::Tensor<T> d_pred({rows, ad});
    const double denom = static_cast<double>(n_valid) * ad;
    for (int r = 0; r < rows; ++r) {
      if (!batch.valid[r]) continue;
      for (int d = 0; d < ad; ++d) {
        const std::size_t i = static_cast<std::size_t>(r) * ad + d;
        const double diff = static_cast<double>(pred_actions_.v[i]) -
                            static_cast<double>(batch.actions[i]);
        loss += diff * diff;
        d_pred.v[i] = static_cast<T>(cfg_.loss_weight_action * 2.0 * diff / denom);
      }
    }
    loss /= denom;
    double total_loss = cfg_.loss_weight_action * loss;

    nn::Tensor<T> d_vs = action_head_.backward(action_sig_.backward(d_pred));

    nn::Tensor<T> d_va;
    if (cfg_.loss_weight_state > 0.0)
      total_loss += state_aux_loss(batch, d_va);
    if (cfg_.loss_weight_return > 0.0)
      total_loss += return_aux_loss(batch, d_vs);

    nn::Tensor<T> d_tokens({B * Tt, h});
    for (int b = 0; b < B; ++b)
      for (int l = 0; l < L; ++l) {
        const std::size_t slot = static_cast<std::size_t>(b) * L + l;
        const std::size_t tok = static_cast<std::size_t>(b) * Tt + 3 * l;
        std::copy_n(d_vs.data() + slot * h, h, d_tokens.data() + (tok + 1) * h);
        if (d_va.size())
          std::copy_n(d_va.data() + slot * h, h,
                      d_tokens.data() + (tok + 2) * h);
      }

    for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it)
      d_tokens = it->backward(d_tokens);
    nn::Tensor<T> d_raw = embed_ln_.backward(d_tokens);
    timestep_.backward(d_raw);

    nn::Tensor<T> d_er({rows, h}), d_es({rows, h}), d_ea({rows, h});
    for (int b = 0; b < B; ++b)
      for (int l = 0; l < L; ++l) {
        const std::size_t slot = static_cast<std::size_t>(b) * L + l;
        const std::size_t tok = static_cast<std::size_t>(b) * Tt + 3 * l;
        std::copy_n(d_raw.data() + tok * h, h, d_er.data() + slot * h);
        std::copy_n(d_raw.data() + (tok + 1) * h, h, d_es.data() + slot * h);
        std::copy_n(d_raw.data() + (tok + 2) * h, h, d_ea.data() + slot * h);
      }
    phi_r_.backward(d_er);
    phi_s_.backward(d_es);
    phi_a_.backward(d_ea);
    return total_loss;
  }

  void zero_grads() {
    embed_params_.zero_grads();
    decoder_params_.zero_grads();
    predict_params_.zero_grads();
  }

  // Predicted raw action for the last (current) slot of a single-sequence
  // context window; evaluation mode.
  std::vector<double> predict_last_action(const ContextBatch<T>& batch) {
    if (batch.batch != 1)
      throw std::invalid_argument("predict_last_action expects batch = 1");
    forward(batch, /*train=*/false);
    const int last = batch.length - 1;
    std::vector<double> out(cfg_.action_dim);
    for (int d = 0; d < cfg_.action_dim; ++d)
      out[d] = static_cast<double>(
          pred_actions_.v[static_cast<std::size_t>(last) * cfg_.action_dim + d]);
    return out;
  }

  const nn::Tensor<T>& predicted_actions() const { return pred_actions_; }

 private:
  double state_aux_loss(const ContextBatch<T>& batch, nn::Tensor<T>& d_va) {
    // next-state regression from the action token, valid where slot l+1 is
    // an unpadded continuation
    const int rows = batch.batch * batch.length;
    const int sd = cfg_.state_dim;
    nn::Tensor<T> d_ps({rows, sd});
    std::size_t n_valid = 0;
    for (int b = 0; b < batch.batch; ++b)
      for (int l = 0; l + 1 < batch.length; ++l) {
        const std::size_t r = static_cast<std::size_t>(b) * batch.length + l;
        if (batch.valid[r] && batch.valid[r + 1]) ++n_valid;
      }
    if (n_valid == 0) return 0.0;
    const double denom = static_cast<double>(n_valid) * sd;
    double loss = 0.0;
    const auto scale = state_scale_;
    for (int b = 0; b < batch.batch; ++b)
      for (int l = 0; l + 1 < batch.length; ++l) {
        const std::size_t r = static_cast<std::size_t>(b) * batch.length + l;
        if (!(batch.valid[r] && batch.valid[r + 1])) continue;
        for (int d = 0; d < sd; ++d) {
          const double target =
              batch.states[(r + 1) * sd + d] * scale[d];
          const double diff =
              static_cast<double>(pred_states_.v[r * sd + d]) - target;
          loss += diff * diff;
          d_ps.v[r * sd + d] =
              static_cast<T>(cfg_.loss_weight_state * 2.0 * diff / denom);
        }
      }
    d_va = state_head_.backward(d_ps);
    return cfg_.loss_weight_state * loss / denom;
  }

  double return_aux_loss(const ContextBatch<T>& batch, nn::Tensor<T>& d_vs) {
    const int rows = batch.batch * batch.length;
    nn::Tensor<T> d_pr({rows, 1});
    std::size_t n_valid = 0;
    for (int r = 0; r < rows; ++r) n_valid += batch.valid[r];
    const double denom = static_cast<double>(n_valid);
    double loss = 0.0;
    const double inv_rtg = 1.0 / cfg_.rtg_scale;
    for (int r = 0; r < rows; ++r) {
      if (!batch.valid[r]) continue;
      const double diff = static_cast<double>(pred_returns_.v[r]) -
                          static_cast<double>(batch.rtg[r]) * inv_rtg;
      loss += diff * diff;
      d_pr.v[r] = static_cast<T>(cfg_.loss_weight_return * 2.0 * diff / denom);
    }
    nn::Tensor<T> extra = return_head_.backward(d_pr);
    kernels::add(d_vs.data(), d_vs.data(), extra.data(), d_vs.size());
    return cfg_.loss_weight_return * loss / denom;
  }

  DtConfig cfg_;
  nn::ParamSet<T> embed_params_, decoder_params_, predict_params_;
  nn::Dense<T> phi_r_, phi_s_, phi_a_;
  nn::EmbeddingTable<T> timestep_;
  nn::LayerNorm<T> embed_ln_;
  std::vector<nn::TransformerBlock<T>> blocks_;
  nn::Dense<T> action_head_, state_head_, return_head_;
  nn::SigmoidLayer<T> action_sig_;
  std::vector<double> state_scale_;
  nn::Rng dropout_rng_;

  // forward caches
  int B_ = 0, L_ = 0;
  std::vector<int> token_timesteps_;
  std::vector<std::uint8_t> token_valid_;
  nn::Tensor<T> pred_actions_, pred_states_, pred_returns_;
};

// Checkpoints use the shared format with split-aware name prefixes.
inline std::vector<std::uint8_t> save_split_checkpoint(
    const SplitDtModel<float>& model) {
  nn::NamedTensorRefs refs;
  auto add = [&refs](const char* prefix, const nn::ParamSet<float>& ps) {
    for (const auto& e : ps.entries())
      refs.emplace_back(std::string(prefix) + e->name, &e->value);
  };
  add("embed.", model.embed_params());
  add("decoder.", model.decoder_params());
  add("predict.", model.predict_params());
  return nn::serialize_checkpoint(refs);
}

inline void load_split_checkpoint(SplitDtModel<float>& model,
                                  const std::vector<std::uint8_t>& bytes) {
  nn::load_values_into(model.embed_params(), bytes, "embed.");
  nn::load_values_into(model.decoder_params(), bytes, "decoder.");
  nn::load_values_into(model.predict_params(), bytes, "predict.");
}

}  // namespace fsdt::dt
