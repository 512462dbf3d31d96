#pragma once
// Scalar reference kernels. These are the ground truth the SIMD variants are
// equivalence-tested against, and the only path used for double precision.

#include <cmath>
#include <cstddef>

namespace fsdt::kernels::scalar {

template <class T>
void gemm(bool trans_a, bool trans_b, int m, int n, int k,
          const T* a, const T* b, T* c, bool accumulate) {
  if (!accumulate) {
    for (int i = 0; i < m * n; ++i) c[i] = T(0);
  }
  if (!trans_a && !trans_b) {
    // A: m x k, B: k x n
    for (int i = 0; i < m; ++i)
      for (int p = 0; p < k; ++p) {
        const T av = a[i * k + p];
        const T* brow = b + p * n;
        T* crow = c + i * n;
        for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
  } else if (!trans_a && trans_b) {
    // A: m x k, B stored n x k
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) {
        T acc = T(0);
        const T* arow = a + i * k;
        const T* brow = b + j * k;
        for (int p = 0; p < k; ++p) acc += arow[p] * brow[p];
        c[i * n + j] += acc;
      }
  } else if (trans_a && !trans_b) {
    // A stored k x m, B: k x n
    for (int p = 0; p < k; ++p) {
      const T* arow = a + p * m;
      const T* brow = b + p * n;
      for (int i = 0; i < m; ++i) {
        const T av = arow[i];
        T* crow = c + i * n;
        for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
    }
  } else {
    // A stored k x m, B stored n x k
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) {
        T acc = T(0);
        for (int p = 0; p < k; ++p) acc += a[p * m + i] * b[j * k + p];
        c[i * n + j] += acc;
      }
  }
}

template <class T>
void add(T* y, const T* a, const T* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a[i] + b[i];
}

template <class T>
void axpy(T* y, T alpha, const T* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <class T>
void scale(T* x, T alpha, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

template <class T>
double reduce_sum(const T* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += static_cast<double>(x[i]);
  return s;
}

template <class T>
double reduce_sumsq(const T* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = static_cast<double>(x[i]);
    s += v * v;
  }
  return s;
}

template <class T>
void adamw_update(T* p, const T* g, T* m, T* v, std::size_t n, T lr, T beta1,
                  T beta2, T eps, T weight_decay, T bias_c1, T bias_c2) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (T(1) - beta1) * g[i];
    v[i] = beta2 * v[i] + (T(1) - beta2) * g[i] * g[i];
    const T mhat = m[i] / bias_c1;
    const T vhat = v[i] / bias_c2;
    p[i] -= lr * (mhat / (std::sqrt(vhat) + eps) + weight_decay * p[i]);
  }
}

// gelu(x) = 0.5 x (1 + tanh(sqrt(2/pi) (x + 0.044715 x^3)))
template <class T>
inline T gelu_one(T x) {
  const T c = T(0.7978845608028654);  // sqrt(2/pi)
  const T x3 = x * x * x;
  return T(0.5) * x * (T(1) + std::tanh(c * (x + T(0.044715) * x3)));
}

template <class T>
inline T gelu_grad_one(T x) {
  const T c = T(0.7978845608028654);
  const T x2 = x * x;
  const T inner = c * (x + T(0.044715) * x2 * x);
  const T th = std::tanh(inner);
  const T sech2 = T(1) - th * th;
  return T(0.5) * (T(1) + th) +
         T(0.5) * x * sech2 * c * (T(1) + T(3) * T(0.044715) * x2);
}

template <class T>
void gelu(T* y, const T* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = gelu_one(x[i]);
}

template <class T>
void gelu_grad(T* dx, const T* dy, const T* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dx[i] += dy[i] * gelu_grad_one(x[i]);
}

template <class T>
void sigmoid(T* y, const T* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = T(1) / (T(1) + std::exp(-x[i]));
}

}  // namespace fsdt::kernels::scalar
