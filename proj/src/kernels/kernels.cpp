#include "fsdt/kernels/kernels.hpp"

#include <cstdlib>
#include <cstring>

#include "fsdt/kernels/scalar.hpp"

namespace fsdt::kernels {

namespace avx2 {
void gemm(bool, bool, int, int, int, const float*, const float*, float*, bool);
void add(float*, const float*, const float*, std::size_t);
void axpy(float*, float, const float*, std::size_t);
void scale(float*, float, std::size_t);
double reduce_sum(const float*, std::size_t);
double reduce_sumsq(const float*, std::size_t);
void adamw_update(float*, const float*, float*, float*, std::size_t, float,
                  float, float, float, float, float, float);
}  // namespace avx2

bool avx2_available() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

Backend pick_initial_backend() {
  if (const char* env = std::getenv("FSDT_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::Scalar;
    if (std::strcmp(env, "avx2") == 0 && avx2_available()) return Backend::Avx2;
  }
  return avx2_available() ? Backend::Avx2 : Backend::Scalar;
}

Backend g_backend = pick_initial_backend();

}  // namespace

Backend active_backend() { return g_backend; }

void set_backend(Backend b) {
  if (b == Backend::Avx2 && !avx2_available()) b = Backend::Scalar;
  g_backend = b;
}

const char* backend_name(Backend b) {
  return b == Backend::Avx2 ? "avx2" : "scalar";
}

void gemm(bool ta, bool tb, int m, int n, int k, const float* a,
          const float* b, float* c, bool accumulate) {
  if (g_backend == Backend::Avx2)
    avx2::gemm(ta, tb, m, n, k, a, b, c, accumulate);
  else
    scalar::gemm(ta, tb, m, n, k, a, b, c, accumulate);
}

void gemm(bool ta, bool tb, int m, int n, int k, const double* a,
          const double* b, double* c, bool accumulate) {
  scalar::gemm(ta, tb, m, n, k, a, b, c, accumulate);
}

void add(float* y, const float* a, const float* b, std::size_t n) {
  if (g_backend == Backend::Avx2)
    avx2::add(y, a, b, n);
  else
    scalar::add(y, a, b, n);
}
void add(double* y, const double* a, const double* b, std::size_t n) {
  scalar::add(y, a, b, n);
}

void axpy(float* y, float alpha, const float* x, std::size_t n) {
  if (g_backend == Backend::Avx2)
    avx2::axpy(y, alpha, x, n);
  else
    scalar::axpy(y, alpha, x, n);
}
void axpy(double* y, double alpha, const double* x, std::size_t n) {
  scalar::axpy(y, alpha, x, n);
}

void scale(float* x, float alpha, std::size_t n) {
  if (g_backend == Backend::Avx2)
    avx2::scale(x, alpha, n);
  else
    scalar::scale(x, alpha, n);
}
void scale(double* x, double alpha, std::size_t n) {
  scalar::scale(x, alpha, n);
}

double reduce_sum(const float* x, std::size_t n) {
  return g_backend == Backend::Avx2 ? avx2::reduce_sum(x, n)
                                    : scalar::reduce_sum(x, n);
}
double reduce_sum(const double* x, std::size_t n) {
  return scalar::reduce_sum(x, n);
}

double reduce_sumsq(const float* x, std::size_t n) {
  return g_backend == Backend::Avx2 ? avx2::reduce_sumsq(x, n)
                                    : scalar::reduce_sumsq(x, n);
}
double reduce_sumsq(const double* x, std::size_t n) {
  return scalar::reduce_sumsq(x, n);
}

void adamw_update(float* p, const float* g, float* m, float* v, std::size_t n,
                  float lr, float b1, float b2, float eps, float wd,
                  float c1, float c2) {
  if (g_backend == Backend::Avx2)
    avx2::adamw_update(p, g, m, v, n, lr, b1, b2, eps, wd, c1, c2);
  else
    scalar::adamw_update(p, g, m, v, n, lr, b1, b2, eps, wd, c1, c2);
}
void adamw_update(double* p, const double* g, double* m, double* v,
                  std::size_t n, double lr, double b1, double b2, double eps,
                  double wd, double c1, double c2) {
  scalar::adamw_update(p, g, m, v, n, lr, b1, b2, eps, wd, c1, c2);
}

void gelu(float* y, const float* x, std::size_t n) { scalar::gelu(y, x, n); }
void gelu(double* y, const double* x, std::size_t n) { scalar::gelu(y, x, n); }
void gelu_grad(float* dx, const float* dy, const float* x, std::size_t n) {
  scalar::gelu_grad(dx, dy, x, n);
}
void gelu_grad(double* dx, const double* dy, const double* x, std::size_t n) {
  scalar::gelu_grad(dx, dy, x, n);
}
void sigmoid(float* y, const float* x, std::size_t n) {
  scalar::sigmoid(y, x, n);
}
void sigmoid(double* y, const double* x, std::size_t n) {
  scalar::sigmoid(y, x, n);
}

}  // namespace fsdt::kernels
