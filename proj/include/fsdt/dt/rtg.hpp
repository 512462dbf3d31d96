#pragma once

#include <vector>

namespace fsdt::dt {

// Undiscounted return-to-go: suffix sums of the reward sequence.
template <class T>
std::vector<T> compute_rtg(const std::vector<T>& rewards) {
  std::vector<T> rtg(rewards.size());
  T acc = T(0);
  for (std::size_t i = rewards.size(); i-- > 0;) {
    acc += rewards[i];
    rtg[i] = acc;
  }
  return rtg;
}

}  // namespace fsdt::dt
