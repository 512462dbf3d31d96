#pragma once
// Layer set needed by the decision transformer: dense, layer-norm, timestep
// embedding table, GELU MLP, dropout, masked causal self-attention, and the
// pre-norm transformer block. Each layer tapes what its backward needs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsdt/kernels/kernels.hpp"
#include "fsdt/nn/param_set.hpp"
#include "fsdt/nn/tensor.hpp"

namespace fsdt::nn {

using Rng = std::mt19937_64;

template <class T>
Tensor<T> normal_init(std::vector<int> shape, Rng& rng, double stddev) {
  Tensor<T> t(std::move(shape));
  std::normal_distribution<double> dist(0.0, stddev);
  for (auto& x : t.v) x = static_cast<T>(dist(rng));
  return t;
}

template <class T>
struct Dense {
  ParamEntry<T>* W = nullptr;  // [in, out]
  ParamEntry<T>* b = nullptr;  // [out]
  int in = 0, out = 0;
  Tensor<T> x_cache;

  Dense() = default;
  Dense(ParamSet<T>& ps, const std::string& name, int in_dim, int out_dim,
        Rng& rng, double init_std = 0.02)
      : in(in_dim), out(out_dim) {
    W = &ps.add(name + ".w", normal_init<T>({in_dim, out_dim}, rng, init_std));
    b = &ps.add(name + ".b", Tensor<T>({out_dim}));
  }

  // x: [N, in] -> [N, out]
  Tensor<T> forward(const Tensor<T>& x) {
    if (x.shape.back() != in) throw std::invalid_argument("dense shape mismatch");
    const int rows = static_cast<int>(x.size()) / in;
    x_cache = x;
    Tensor<T> y({rows, out});
    kernels::gemm(false, false, rows, out, in, x.data(), W->value.data(),
                  y.data(), false);
    for (int r = 0; r < rows; ++r)
      kernels::add(y.data() + r * out, y.data() + r * out, b->value.data(),
                   out);
    debug_check_finite(y);
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    const int rows = static_cast<int>(dy.size()) / out;
    // dW += x^T dy ; db += column sum of dy ; dx = dy W^T
    kernels::gemm(true, false, in, out, rows, x_cache.data(), dy.data(),
                  W->grad.data(), true);
    for (int r = 0; r < rows; ++r)
      kernels::add(b->grad.data(), b->grad.data(), dy.data() + r * out, out);
    Tensor<T> dx({rows, in});
    kernels::gemm(false, true, rows, in, out, dy.data(), W->value.data(),
                  dx.data(), false);
    return dx;
  }
};

template <class T>
struct LayerNorm {
  ParamEntry<T>* g = nullptr;
  ParamEntry<T>* b = nullptr;
  int dim = 0;
  T eps = static_cast<T>(1e-5);
  Tensor<T> xhat_cache;
  std::vector<T> rstd_cache;

  LayerNorm() = default;
  LayerNorm(ParamSet<T>& ps, const std::string& name, int d) : dim(d) {
    Tensor<T> ones({d});
    ones.fill(T(1));
    g = &ps.add(name + ".g", std::move(ones));
    b = &ps.add(name + ".b", Tensor<T>({d}));
  }

  Tensor<T> forward(const Tensor<T>& x) {
    const int rows = static_cast<int>(x.size()) / dim;
    xhat_cache = Tensor<T>({rows, dim});
    rstd_cache.assign(rows, T(0));
    Tensor<T> y({rows, dim});
    for (int r = 0; r < rows; ++r) {
      const T* xr = x.data() + r * dim;
      T mean = T(0);
      for (int j = 0; j < dim; ++j) mean += xr[j];
      mean /= static_cast<T>(dim);
      T var = T(0);
      for (int j = 0; j < dim; ++j) {
        const T d = xr[j] - mean;
        var += d * d;
      }
      var /= static_cast<T>(dim);
      const T rstd = T(1) / std::sqrt(var + eps);
      rstd_cache[r] = rstd;
      T* xh = xhat_cache.data() + r * dim;
      T* yr = y.data() + r * dim;
      for (int j = 0; j < dim; ++j) {
        xh[j] = (xr[j] - mean) * rstd;
        yr[j] = g->value.v[j] * xh[j] + b->value.v[j];
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    const int rows = static_cast<int>(dy.size()) / dim;
    Tensor<T> dx({rows, dim});
    for (int r = 0; r < rows; ++r) {
      const T* dyr = dy.data() + r * dim;
      const T* xh = xhat_cache.data() + r * dim;
      T mean_dxhat = T(0), mean_dxhat_xhat = T(0);
      for (int j = 0; j < dim; ++j) {
        g->grad.v[j] += dyr[j] * xh[j];
        b->grad.v[j] += dyr[j];
        const T dxh = dyr[j] * g->value.v[j];
        mean_dxhat += dxh;
        mean_dxhat_xhat += dxh * xh[j];
      }
      mean_dxhat /= static_cast<T>(dim);
      mean_dxhat_xhat /= static_cast<T>(dim);
      T* dxr = dx.data() + r * dim;
      const T rstd = rstd_cache[r];
      for (int j = 0; j < dim; ++j) {
        const T dxh = dyr[j] * g->value.v[j];
        dxr[j] = rstd * (dxh - mean_dxhat - xh[j] * mean_dxhat_xhat);
      }
    }
    return dx;
  }
};

// Lookup table for timestep (positional) embeddings.
template <class T>
struct EmbeddingTable {
  ParamEntry<T>* table = nullptr;  // [rows, dim]
  int rows = 0, dim = 0;
  std::vector<int> idx_cache;

  EmbeddingTable() = default;
  EmbeddingTable(ParamSet<T>& ps, const std::string& name, int n_rows, int d,
                 Rng& rng, double init_std = 0.02)
      : rows(n_rows), dim(d) {
    table = &ps.add(name, normal_init<T>({n_rows, d}, rng, init_std));
  }

  Tensor<T> forward(const std::vector<int>& idx) {
    idx_cache = idx;
    Tensor<T> y({static_cast<int>(idx.size()), dim});
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (idx[i] < 0 || idx[i] >= rows)
        throw std::out_of_range("timestep index out of range");
      std::copy_n(table->value.data() + idx[i] * dim, dim, y.data() + i * dim);
    }
    return y;
  }

  void backward(const Tensor<T>& dy) {
    for (std::size_t i = 0; i < idx_cache.size(); ++i)
      kernels::add(table->grad.data() + idx_cache[i] * dim,
                   table->grad.data() + idx_cache[i] * dim,
                   dy.data() + i * dim, dim);
  }
};

// Inverted dropout; identity in eval mode.
template <class T>
struct Dropout {
  double rate = 0.0;
  bool active = false;
  std::vector<T> mask;

  explicit Dropout(double p = 0.0) : rate(p) {}

  Tensor<T> forward(const Tensor<T>& x, bool train, Rng& rng) {
    active = train && rate > 0.0;
    if (!active) return x;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const T keep_scale = static_cast<T>(1.0 / (1.0 - rate));
    mask.assign(x.size(), T(0));
    Tensor<T> y(x.shape);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (u(rng) >= rate) {
        mask[i] = keep_scale;
        y.v[i] = x.v[i] * keep_scale;
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    if (!active) return dy;
    Tensor<T> dx(dy.shape);
    for (std::size_t i = 0; i < dy.size(); ++i) dx.v[i] = dy.v[i] * mask[i];
    return dx;
  }
};

template <class T>
struct Gelu {
  Tensor<T> x_cache;

  Tensor<T> forward(const Tensor<T>& x) {
    x_cache = x;
    Tensor<T> y(x.shape);
    kernels::gelu(y.data(), x.data(), x.size());
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    Tensor<T> dx(dy.shape);
    kernels::gelu_grad(dx.data(), dy.data(), x_cache.data(), dy.size());
    return dx;
  }
};

template <class T>
struct SigmoidLayer {
  Tensor<T> y_cache;

  Tensor<T> forward(const Tensor<T>& x) {
    Tensor<T> y(x.shape);
    kernels::sigmoid(y.data(), x.data(), x.size());
    y_cache = y;
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    Tensor<T> dx(dy.shape);
    for (std::size_t i = 0; i < dy.size(); ++i) {
      const T s = y_cache.v[i];
      dx.v[i] = dy.v[i] * s * (T(1) - s);
    }
    return dx;
  }
};

// Masked causal multi-head self-attention over a [B, Tt, d] token stream
// (flattened to [B*Tt, d]). The valid mask removes padded positions from the
// key set; the causal mask removes future positions.
template <class T>
struct CausalSelfAttention {
  Dense<T> qkv;
  Dense<T> proj;
  int dim = 0, n_heads = 0, head_dim = 0;
  Dropout<T> attn_drop;

  // caches
  int B_ = 0, Tt_ = 0;
  std::vector<T> q_, k_, v_;              // [B,H,Tt,hd]
  std::vector<T> probs_;                  // pre-dropout softmax [B,H,Tt,Tt]
  std::vector<T> probs_used_;             // post-dropout probs used for A*V
  bool drop_active_ = false;

  CausalSelfAttention() = default;
  CausalSelfAttention(ParamSet<T>& ps, const std::string& name, int d,
                      int heads, double dropout_rate, Rng& rng)
      : qkv(ps, name + ".qkv", d, 3 * d, rng),
        proj(ps, name + ".proj", d, d, rng),
        dim(d),
        n_heads(heads),
        head_dim(d / heads),
        attn_drop(dropout_rate) {
    if (d % heads != 0)
      throw std::invalid_argument("hidden_dim not divisible by n_heads");
  }

  Tensor<T> forward(const Tensor<T>& x, int B, int Tt,
                    const std::vector<std::uint8_t>& valid, bool train,
                    Rng& rng) {
    B_ = B;
    Tt_ = Tt;
    const int H = n_heads, hd = head_dim;
    Tensor<T> qkv_out = qkv.forward(x);  // [B*Tt, 3d]
    const std::size_t per_head = static_cast<std::size_t>(Tt) * hd;
    q_.assign(static_cast<std::size_t>(B) * H * per_head, T(0));
    k_.assign(q_.size(), T(0));
    v_.assign(q_.size(), T(0));
    for (int b = 0; b < B; ++b)
      for (int t = 0; t < Tt; ++t) {
        const T* row = qkv_out.data() + (static_cast<std::size_t>(b) * Tt + t) * 3 * dim;
        for (int h = 0; h < H; ++h) {
          const std::size_t base =
              ((static_cast<std::size_t>(b) * H + h) * Tt + t) * hd;
          std::copy_n(row + h * hd, hd, q_.data() + base);
          std::copy_n(row + dim + h * hd, hd, k_.data() + base);
          std::copy_n(row + 2 * dim + h * hd, hd, v_.data() + base);
        }
      }

    const T inv_sqrt_hd = static_cast<T>(1.0 / std::sqrt(static_cast<double>(hd)));
    const T neg_big = static_cast<T>(-1e30);
    probs_.assign(static_cast<std::size_t>(B) * H * Tt * Tt, T(0));
    for (int b = 0; b < B; ++b)
      for (int h = 0; h < H; ++h) {
        const std::size_t qbase = (static_cast<std::size_t>(b) * H + h) * per_head;
        T* scores = probs_.data() + (static_cast<std::size_t>(b) * H + h) * Tt * Tt;
        kernels::gemm(false, true, Tt, Tt, hd, q_.data() + qbase,
                      k_.data() + qbase, scores, false);
        for (int i = 0; i < Tt; ++i) {
          T* row = scores + static_cast<std::size_t>(i) * Tt;
          for (int j = 0; j < Tt; ++j) {
            if (j > i || !valid[static_cast<std::size_t>(b) * Tt + j])
              row[j] = neg_big;
            else
              row[j] *= inv_sqrt_hd;
          }
          // softmax with max subtraction
          T mx = row[0];
          for (int j = 1; j < Tt; ++j) mx = std::max(mx, row[j]);
          T sum = T(0);
          for (int j = 0; j < Tt; ++j) {
            row[j] = std::exp(row[j] - mx);
            sum += row[j];
          }
          const T inv = T(1) / sum;
          for (int j = 0; j < Tt; ++j) row[j] *= inv;
        }
      }

    drop_active_ = train && attn_drop.rate > 0.0;
    if (drop_active_) {
      Tensor<T> pt({static_cast<int>(probs_.size())});
      pt.v = probs_;
      Tensor<T> dropped = attn_drop.forward(pt, train, rng);
      probs_used_ = std::move(dropped.v);
    } else {
      probs_used_ = probs_;
    }

    Tensor<T> merged({B * Tt, dim});
    std::vector<T> out_head(per_head);
    for (int b = 0; b < B; ++b)
      for (int h = 0; h < H; ++h) {
        const std::size_t base = (static_cast<std::size_t>(b) * H + h);
        kernels::gemm(false, false, Tt, hd, Tt,
                      probs_used_.data() + base * Tt * Tt,
                      v_.data() + base * per_head, out_head.data(), false);
        for (int t = 0; t < Tt; ++t)
          std::copy_n(out_head.data() + static_cast<std::size_t>(t) * hd, hd,
                      merged.data() + (static_cast<std::size_t>(b) * Tt + t) * dim + h * hd);
      }
    return proj.forward(merged);
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    const int B = B_, Tt = Tt_, H = n_heads, hd = head_dim;
    const std::size_t per_head = static_cast<std::size_t>(Tt) * hd;
    Tensor<T> d_merged = proj.backward(dy);  // [B*Tt, d]

    Tensor<T> dqkv({B * Tt, 3 * dim});
    std::vector<T> dO(per_head), dP(static_cast<std::size_t>(Tt) * Tt),
        dS(static_cast<std::size_t>(Tt) * Tt), dQ(per_head), dK(per_head),
        dV(per_head);
    const T inv_sqrt_hd = static_cast<T>(1.0 / std::sqrt(static_cast<double>(hd)));

    for (int b = 0; b < B; ++b)
      for (int h = 0; h < H; ++h) {
        const std::size_t base = (static_cast<std::size_t>(b) * H + h);
        for (int t = 0; t < Tt; ++t)
          std::copy_n(d_merged.data() + (static_cast<std::size_t>(b) * Tt + t) * dim + h * hd,
                      hd, dO.data() + static_cast<std::size_t>(t) * hd);
        const T* P = probs_.data() + base * Tt * Tt;
        const T* Pu = probs_used_.data() + base * Tt * Tt;
        // dP_used = dO V^T ; dV = P_used^T dO
        kernels::gemm(false, true, Tt, Tt, hd, dO.data(),
                      v_.data() + base * per_head, dP.data(), false);
        kernels::gemm(true, false, Tt, hd, Tt, Pu, dO.data(), dV.data(), false);
        if (drop_active_) {
          const T* mask = attn_drop.mask.data() + base * Tt * Tt;
          for (std::size_t i = 0; i < dP.size(); ++i) dP[i] *= mask[i];
        }
        // softmax backward: dS = P o (dP - rowsum(dP o P))
        for (int i = 0; i < Tt; ++i) {
          const T* Pr = P + static_cast<std::size_t>(i) * Tt;
          T* dPr = dP.data() + static_cast<std::size_t>(i) * Tt;
          T* dSr = dS.data() + static_cast<std::size_t>(i) * Tt;
          T dot = T(0);
          for (int j = 0; j < Tt; ++j) dot += dPr[j] * Pr[j];
          for (int j = 0; j < Tt; ++j)
            dSr[j] = Pr[j] * (dPr[j] - dot) * inv_sqrt_hd;
        }
        const std::size_t qbase = base * per_head;
        kernels::gemm(false, false, Tt, hd, Tt, dS.data(), k_.data() + qbase,
                      dQ.data(), false);
        kernels::gemm(true, false, Tt, hd, Tt, dS.data(), q_.data() + qbase,
                      dK.data(), false);
        for (int t = 0; t < Tt; ++t) {
          T* row = dqkv.data() + (static_cast<std::size_t>(b) * Tt + t) * 3 * dim;
          std::copy_n(dQ.data() + static_cast<std::size_t>(t) * hd, hd, row + h * hd);
          std::copy_n(dK.data() + static_cast<std::size_t>(t) * hd, hd, row + dim + h * hd);
          std::copy_n(dV.data() + static_cast<std::size_t>(t) * hd, hd, row + 2 * dim + h * hd);
        }
      }
    return qkv.backward(dqkv);
  }
};

template <class T>
struct Mlp {
  Dense<T> fc;
  Gelu<T> act;
  Dense<T> out;

  Mlp() = default;
  Mlp(ParamSet<T>& ps, const std::string& name, int d, int ratio, Rng& rng)
      : fc(ps, name + ".fc", d, ratio * d, rng),
        out(ps, name + ".out", ratio * d, d, rng) {}

  Tensor<T> forward(const Tensor<T>& x) {
    return out.forward(act.forward(fc.forward(x)));
  }
  Tensor<T> backward(const Tensor<T>& dy) {
    return fc.backward(act.backward(out.backward(dy)));
  }
};

// Pre-norm GPT block: x + attn(ln1(x)), then x + mlp(ln2(x)).
template <class T>
struct TransformerBlock {
  LayerNorm<T> ln1, ln2;
  CausalSelfAttention<T> attn;
  Mlp<T> mlp;
  Dropout<T> drop1, drop2;

  TransformerBlock() = default;
  TransformerBlock(ParamSet<T>& ps, const std::string& name, int d, int heads,
                   int mlp_ratio, double dropout_rate, Rng& rng)
      : ln1(ps, name + ".ln1", d),
        ln2(ps, name + ".ln2", d),
        attn(ps, name + ".attn", d, heads, dropout_rate, rng),
        mlp(ps, name + ".mlp", d, mlp_ratio, rng),
        drop1(dropout_rate),
        drop2(dropout_rate) {}

  Tensor<T> forward(const Tensor<T>& x, int B, int Tt,
                    const std::vector<std::uint8_t>& valid, bool train,
                    Rng& rng) {
    Tensor<T> a = drop1.forward(
        attn.forward(ln1.forward(x), B, Tt, valid, train, rng), train, rng);
    Tensor<T> x1(x.shape);
    kernels::add(x1.data(), x.data(), a.data(), x.size());
    Tensor<T> m = drop2.forward(mlp.forward(ln2.forward(x1)), train, rng);
    Tensor<T> y(x.shape);
    kernels::add(y.data(), x1.data(), m.data(), x.size());
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    Tensor<T> dh2 = ln2.backward(mlp.backward(drop2.backward(dy)));
    Tensor<T> dx1(dy.shape);
    kernels::add(dx1.data(), dy.data(), dh2.data(), dy.size());
    Tensor<T> dh1 = ln1.backward(attn.backward(drop1.backward(dx1)));
    Tensor<T> dx(dy.shape);
    kernels::add(dx.data(), dx1.data(), dh1.data(), dy.size());
    return dx;
  }
};

}  // namespace fsdt::nn
