#pragma once
// Federated averaging over structurally identical parameter sets.

#include <stdexcept>
#include <vector>

#include "fsdt/nn/param_set.hpp"

namespace fsdt::fed {

// dst.value[i] = mean over sources. Double accumulation; averaging a single
// source is the bit-exact identity. Optimizer state is untouched.
template <class T>
void fedavg(nn::ParamSet<T>& dst,
            const std::vector<const nn::ParamSet<T>*>& srcs) {
  if (srcs.empty()) throw std::invalid_argument("fedavg over zero sources");
  const double inv_n = 1.0 / static_cast<double>(srcs.size());
  for (std::size_t i = 0; i < dst.entry_count(); ++i) {
    auto& d = *dst.entries()[i];
    for (const auto* src : srcs) {
      const auto& s = *src->entries()[i];
      if (s.name != d.name || !s.value.same_shape(d.value))
        throw std::invalid_argument("fedavg structure mismatch: " + d.name);
    }
    for (std::size_t j = 0; j < d.value.size(); ++j) {
      double sum = 0.0;
      for (const auto* src : srcs)
        sum += static_cast<double>(src->entries()[i]->value.v[j]);
      d.value.v[j] = static_cast<T>(sum * inv_n);
    }
  }
}

}  // namespace fsdt::fed
