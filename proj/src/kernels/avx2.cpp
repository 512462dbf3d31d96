// AVX2 float kernels. This TU is compiled with -mavx2 -mfma; nothing here may
// run unless avx2_available() reported true. On non-x86 targets the symbols
// fall back to the scalar reference (they are never dispatched to anyway).

#if !defined(__x86_64__) && !defined(__i386__)

#include "fsdt/kernels/scalar.hpp"

namespace fsdt::kernels::avx2 {
void gemm(bool ta, bool tb, int m, int n, int k, const float* a,
          const float* b, float* c, bool acc) {
  scalar::gemm(ta, tb, m, n, k, a, b, c, acc);
}
void add(float* y, const float* a, const float* b, std::size_t n) {
  scalar::add(y, a, b, n);
}
void axpy(float* y, float alpha, const float* x, std::size_t n) {
  scalar::axpy(y, alpha, x, n);
}
void scale(float* x, float alpha, std::size_t n) { scalar::scale(x, alpha, n); }
double reduce_sum(const float* x, std::size_t n) {
  return scalar::reduce_sum(x, n);
}
double reduce_sumsq(const float* x, std::size_t n) {
  return scalar::reduce_sumsq(x, n);
}
void adamw_update(float* p, const float* g, float* m, float* v, std::size_t n,
                  float lr, float b1, float b2, float eps, float wd, float c1,
                  float c2) {
  scalar::adamw_update(p, g, m, v, n, lr, b1, b2, eps, wd, c1, c2);
}
}  // namespace fsdt::kernels::avx2

#else

#include <immintrin.h>

#include <cmath>
#include <cstddef>

namespace fsdt::kernels::avx2 {

namespace {

inline float hsum8(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  lo = _mm_hadd_ps(lo, lo);
  lo = _mm_hadd_ps(lo, lo);
  return _mm_cvtss_f32(lo);
}

inline double hsum4d(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  lo = _mm_hadd_pd(lo, lo);
  return _mm_cvtsd_f64(lo);
}

inline void zero_rows(float* c, int count) {
  int i = 0;
  const __m256 z = _mm256_setzero_ps();
  for (; i + 8 <= count; i += 8) _mm256_storeu_ps(c + i, z);
  for (; i < count; ++i) c[i] = 0.0f;
}

// crow[j] += av * brow[j], j in [0, n)
inline void fma_row(float* crow, float av, const float* brow, int n) {
  const __m256 va = _mm256_set1_ps(av);
  int j = 0;
  for (; j + 16 <= n; j += 16) {
    __m256 c0 = _mm256_loadu_ps(crow + j);
    __m256 c1 = _mm256_loadu_ps(crow + j + 8);
    c0 = _mm256_fmadd_ps(va, _mm256_loadu_ps(brow + j), c0);
    c1 = _mm256_fmadd_ps(va, _mm256_loadu_ps(brow + j + 8), c1);
    _mm256_storeu_ps(crow + j, c0);
    _mm256_storeu_ps(crow + j + 8, c1);
  }
  for (; j + 8 <= n; j += 8) {
    __m256 c0 = _mm256_loadu_ps(crow + j);
    c0 = _mm256_fmadd_ps(va, _mm256_loadu_ps(brow + j), c0);
    _mm256_storeu_ps(crow + j, c0);
  }
  for (; j < n; ++j) crow[j] += av * brow[j];
}

inline float dot(const float* a, const float* b, int k) {
  __m256 acc0 = _mm256_setzero_ps();
  __m256 acc1 = _mm256_setzero_ps();
  __m256 acc2 = _mm256_setzero_ps();
  __m256 acc3 = _mm256_setzero_ps();
  int p = 0;
  for (; p + 32 <= k; p += 32) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + p), _mm256_loadu_ps(b + p), acc0);
    acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(a + p + 8), _mm256_loadu_ps(b + p + 8), acc1);
    acc2 = _mm256_fmadd_ps(_mm256_loadu_ps(a + p + 16), _mm256_loadu_ps(b + p + 16), acc2);
    acc3 = _mm256_fmadd_ps(_mm256_loadu_ps(a + p + 24), _mm256_loadu_ps(b + p + 24), acc3);
  }
  for (; p + 8 <= k; p += 8)
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + p), _mm256_loadu_ps(b + p), acc0);
  acc0 = _mm256_add_ps(_mm256_add_ps(acc0, acc1), _mm256_add_ps(acc2, acc3));
  float s = hsum8(acc0);
  for (; p < k; ++p) s += a[p] * b[p];
  return s;
}

}  // namespace

void gemm(bool trans_a, bool trans_b, int m, int n, int k, const float* a,
          const float* b, float* c, bool accumulate) {
  if (!accumulate && !(!trans_a && trans_b) && !(trans_a && trans_b))
    zero_rows(c, m * n);
  if (!trans_a && !trans_b) {
    for (int i = 0; i < m; ++i)
      for (int p = 0; p < k; ++p)
        fma_row(c + i * n, a[i * k + p], b + p * n, n);
  } else if (!trans_a && trans_b) {
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) {
        const float d = dot(a + i * k, b + j * k, k);
        if (accumulate)
          c[i * n + j] += d;
        else
          c[i * n + j] = d;
      }
  } else if (trans_a && !trans_b) {
    for (int p = 0; p < k; ++p) {
      const float* arow = a + p * m;
      const float* brow = b + p * n;
      for (int i = 0; i < m; ++i) fma_row(c + i * n, arow[i], brow, n);
    }
  } else {
    // trans_a && trans_b: strided A access, no contiguous axis on A; keep the
    // dot on B rows with a scalar gather of A.
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) {
        float acc = 0.0f;
        for (int p = 0; p < k; ++p) acc += a[p * m + i] * b[j * k + p];
        if (accumulate)
          c[i * n + j] += acc;
        else
          c[i * n + j] = acc;
      }
  }
}

void add(float* y, const float* a, const float* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_add_ps(_mm256_loadu_ps(a + i),
                                          _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) y[i] = a[i] + b[i];
}

void axpy(float* y, float alpha, const float* x, std::size_t n) {
  const __m256 va = _mm256_set1_ps(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 vy = _mm256_loadu_ps(y + i);
    vy = _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i), vy);
    _mm256_storeu_ps(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale(float* x, float alpha, std::size_t n) {
  const __m256 va = _mm256_set1_ps(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(x + i, _mm256_mul_ps(va, _mm256_loadu_ps(x + i)));
  for (; i < n; ++i) x[i] *= alpha;
}

double reduce_sum(const float* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_add_pd(acc, _mm256_cvtps_pd(_mm_loadu_ps(x + i)));
  double s = hsum4d(acc);
  for (; i < n; ++i) s += static_cast<double>(x[i]);
  return s;
}

double reduce_sumsq(const float* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_cvtps_pd(_mm_loadu_ps(x + i));
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double s = hsum4d(acc);
  for (; i < n; ++i) {
    const double v = static_cast<double>(x[i]);
    s += v * v;
  }
  return s;
}

void adamw_update(float* p, const float* g, float* m, float* v, std::size_t n,
                  float lr, float beta1, float beta2, float eps,
                  float weight_decay, float bias_c1, float bias_c2) {
  const __m256 vb1 = _mm256_set1_ps(beta1);
  const __m256 vb2 = _mm256_set1_ps(beta2);
  const __m256 v1mb1 = _mm256_set1_ps(1.0f - beta1);
  const __m256 v1mb2 = _mm256_set1_ps(1.0f - beta2);
  const __m256 vic1 = _mm256_set1_ps(1.0f / bias_c1);
  const __m256 vic2 = _mm256_set1_ps(1.0f / bias_c2);
  const __m256 veps = _mm256_set1_ps(eps);
  const __m256 vlr = _mm256_set1_ps(lr);
  const __m256 vwd = _mm256_set1_ps(weight_decay);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 gv = _mm256_loadu_ps(g + i);
    __m256 mv = _mm256_loadu_ps(m + i);
    __m256 vv = _mm256_loadu_ps(v + i);
    mv = _mm256_fmadd_ps(v1mb1, gv, _mm256_mul_ps(vb1, mv));
    vv = _mm256_fmadd_ps(v1mb2, _mm256_mul_ps(gv, gv), _mm256_mul_ps(vb2, vv));
    _mm256_storeu_ps(m + i, mv);
    _mm256_storeu_ps(v + i, vv);
    const __m256 mhat = _mm256_mul_ps(mv, vic1);
    const __m256 vhat = _mm256_mul_ps(vv, vic2);
    const __m256 denom = _mm256_add_ps(_mm256_sqrt_ps(vhat), veps);
    __m256 pv = _mm256_loadu_ps(p + i);
    const __m256 upd =
        _mm256_fmadd_ps(vwd, pv, _mm256_div_ps(mhat, denom));
    pv = _mm256_fnmadd_ps(vlr, upd, pv);
    _mm256_storeu_ps(p + i, pv);
  }
  for (; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0f - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0f - beta2) * g[i] * g[i];
    const float mhat = m[i] / bias_c1;
    const float vhat = v[i] / bias_c2;
    p[i] -= lr * (mhat / (std::sqrt(vhat) + eps) + weight_decay * p[i]);
  }
}

}  // namespace fsdt::kernels::avx2

#endif  // x86
