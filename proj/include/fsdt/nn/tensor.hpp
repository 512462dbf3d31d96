#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace fsdt::nn {

// Dense row-major tensor. float is the training precision; double is used by
// the gradient-check mode.
template <class T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> v;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    v.assign(count(shape), T(0));
  }

  static std::size_t count(const std::vector<int>& s) {
    std::size_t n = 1;
    for (int d : s) {
      if (d < 0) throw std::invalid_argument("negative tensor dim");
      n *= static_cast<std::size_t>(d);
    }
    return n;
  }

  std::size_t size() const { return v.size(); }
  T* data() { return v.data(); }
  const T* data() const { return v.data(); }
  void fill(T x) { std::fill(v.begin(), v.end(), x); }
  void zero() { fill(T(0)); }

  int dim(std::size_t i) const {
    assert(i < shape.size());
    return shape[i];
  }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

template <class T>
inline bool all_finite(const Tensor<T>& t) {
  for (T x : t.v)
    if (!std::isfinite(static_cast<double>(x))) return false;
  return true;
}

// Debug-mode NaN guard; a no-op in release builds.
template <class T>
inline void debug_check_finite(const Tensor<T>& t) {
#ifndef NDEBUG
  assert(all_finite(t));
#else
  (void)t;
#endif
}

}  // namespace fsdt::nn
