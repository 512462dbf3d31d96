#pragma once
// Data-parallel math kernels used by the tensor/NN layer.
//
// Every kernel has a scalar reference implementation and (on x86-64) an
// AVX2 variant. The backend is picked once at startup from CPUID and can be
// overridden with set_backend() or the FSDT_KERNELS env var ("scalar"/"avx2").
// float is the training precision and goes through the dispatch table;
// double is the verification precision and always uses the scalar path.

#include <cstddef>
#include <cstdint>

namespace fsdt::kernels {

enum class Backend { Scalar, Avx2 };

Backend active_backend();
void set_backend(Backend b);
const char* backend_name(Backend b);
bool avx2_available();

// Row-major GEMM: C = op(A) * op(B), or C += ... when accumulate is set.
// op(A) is M x K, op(B) is K x N. trans_a means A is stored K x M.
void gemm(bool trans_a, bool trans_b, int m, int n, int k,
          const float* a, const float* b, float* c, bool accumulate);
void gemm(bool trans_a, bool trans_b, int m, int n, int k,
          const double* a, const double* b, double* c, bool accumulate);

// y[i] = a[i] + b[i]
void add(float* y, const float* a, const float* b, std::size_t n);
void add(double* y, const double* a, const double* b, std::size_t n);

// y[i] += alpha * x[i]
void axpy(float* y, float alpha, const float* x, std::size_t n);
void axpy(double* y, double alpha, const double* x, std::size_t n);

// x[i] *= alpha
void scale(float* x, float alpha, std::size_t n);
void scale(double* x, double alpha, std::size_t n);

double reduce_sum(const float* x, std::size_t n);
double reduce_sum(const double* x, std::size_t n);
double reduce_sumsq(const float* x, std::size_t n);
double reduce_sumsq(const double* x, std::size_t n);

// One AdamW update over a contiguous parameter block. Moments are updated in
// place; bias_c1/bias_c2 are 1 - beta^t for the current step. Weight decay is
// decoupled (applied to the parameter, not the gradient).
void adamw_update(float* p, const float* g, float* m, float* v, std::size_t n,
                  float lr, float beta1, float beta2, float eps,
                  float weight_decay, float bias_c1, float bias_c2);
void adamw_update(double* p, const double* g, double* m, double* v, std::size_t n,
                  double lr, double beta1, double beta2, double eps,
                  double weight_decay, double bias_c1, double bias_c2);

// tanh-approximation GELU; the backward uses the analytic derivative of the
// same approximation. Transcendental kernels are scalar on both backends.
void gelu(float* y, const float* x, std::size_t n);
void gelu(double* y, const double* x, std::size_t n);
// dx[i] += dy[i] * gelu'(x[i])
void gelu_grad(float* dx, const float* dy, const float* x, std::size_t n);
void gelu_grad(double* dx, const double* dy, const double* x, std::size_t n);

void sigmoid(float* y, const float* x, std::size_t n);
void sigmoid(double* y, const double* x, std::size_t n);

}  // namespace fsdt::kernels
