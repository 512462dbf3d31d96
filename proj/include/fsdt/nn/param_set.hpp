#pragma once

#include <cstdint>
#include <cstring>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fsdt/kernels/kernels.hpp"
#include "fsdt/nn/tensor.hpp"

namespace fsdt::nn {

template <class T>
struct ParamEntry {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
  Tensor<T> m;  // AdamW first moment
  Tensor<T> v;  // AdamW second moment
};

// Ordered, uniquely-named collection of trainable parameters together with
// gradient accumulators and optimizer state. Entry pointers are stable, so
// layers can hold on to them.
template <class T>
class ParamSet {
 public:
  ParamEntry<T>& add(const std::string& name, Tensor<T> init) {
    if (index_.count(name)) throw std::invalid_argument("duplicate param: " + name);
    auto e = std::make_unique<ParamEntry<T>>();
    e->name = name;
    e->grad = Tensor<T>(init.shape);
    e->m = Tensor<T>(init.shape);
    e->v = Tensor<T>(init.shape);
    e->value = std::move(init);
    ParamEntry<T>* raw = e.get();
    entries_.push_back(std::move(e));
    index_[name] = raw;
    return *raw;
  }

  ParamEntry<T>* find(std::string_view name) {
    auto it = index_.find(std::string(name));
    return it == index_.end() ? nullptr : it->second;
  }
  const ParamEntry<T>* find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    return it == index_.end() ? nullptr : it->second;
  }

  const std::vector<std::unique_ptr<ParamEntry<T>>>& entries() const {
    return entries_;
  }
  std::vector<std::unique_ptr<ParamEntry<T>>>& entries() { return entries_; }

  std::size_t entry_count() const { return entries_.size(); }

  void zero_grads() {
    for (auto& e : entries_) e->grad.zero();
  }

  struct Count {
    std::size_t params = 0;
    std::size_t bytes = 0;  // 4 bytes per parameter (32-bit training precision)
  };

  Count count(std::string_view name_prefix = "") const {
    Count c;
    for (const auto& e : entries_) {
      if (e->name.rfind(name_prefix, 0) != 0) continue;
      c.params += e->value.size();
    }
    c.bytes = c.params * 4;
    return c;
  }

  long step() const { return step_; }
  void set_step(long s) { step_ = s; }
  void increment_step() { ++step_; }

 private:
  std::vector<std::unique_ptr<ParamEntry<T>>> entries_;
  std::unordered_map<std::string, ParamEntry<T>*> index_;
  long step_ = 0;
};

struct AdamwConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-4;
};

// One decoupled-weight-decay Adam step over every entry of the set, with
// bias-corrected moments. The set keeps its own step counter.
template <class T>
void adamw_step(ParamSet<T>& ps, const AdamwConfig& cfg) {
  ps.increment_step();
  const double t = static_cast<double>(ps.step());
  const T c1 = static_cast<T>(1.0 - std::pow(cfg.beta1, t));
  const T c2 = static_cast<T>(1.0 - std::pow(cfg.beta2, t));
  for (auto& e : ps.entries()) {
    kernels::adamw_update(e->value.data(), e->grad.data(), e->m.data(),
                          e->v.data(), e->value.size(), static_cast<T>(cfg.lr),
                          static_cast<T>(cfg.beta1), static_cast<T>(cfg.beta2),
                          static_cast<T>(cfg.eps),
                          static_cast<T>(cfg.weight_decay), c1, c2);
  }
}

// Copies parameter values (not optimizer state) between structurally
// identical sets.
template <class T>
void copy_values(ParamSet<T>& dst, const ParamSet<T>& src) {
  if (dst.entry_count() != src.entry_count())
    throw std::invalid_argument("param set structure mismatch");
  for (std::size_t i = 0; i < dst.entry_count(); ++i) {
    auto& d = *dst.entries()[i];
    const auto& s = *src.entries()[i];
    if (d.name != s.name || !d.value.same_shape(s.value))
      throw std::invalid_argument("param entry mismatch: " + d.name);
    d.value.v = s.value.v;
  }
}

// FNV-1a over the raw value bytes; used for freeze/phase-isolation checks.
template <class T>
std::uint64_t value_bytes_hash(const ParamSet<T>& ps) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  for (const auto& e : ps.entries()) {
    mix(e->name.data(), e->name.size());
    mix(e->value.data(), e->value.size() * sizeof(T));
  }
  return h;
}

}  // namespace fsdt::nn
