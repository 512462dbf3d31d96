#include <cmath>
#include <cstdlib>
#include <random>
#include <tuple>
#include <vector>

#include <doctest.h>

#include "fsdt/kernels/kernels.hpp"

using namespace fsdt;

namespace {

template <class T>
std::vector<T> random_vec(std::size_t n, std::mt19937_64& rng, double lo = -1.0,
                          double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<T> v(n);
  for (auto& x : v) x = static_cast<T>(u(rng));
  return v;
}

// straightforward triple loop oracle, double accumulation
template <class T>
void naive_gemm(bool ta, bool tb, int m, int n, int k, const T* a, const T* b,
                T* c, bool acc) {
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      double s = acc ? static_cast<double>(c[i * n + j]) : 0.0;
      for (int p = 0; p < k; ++p) {
        const double av = ta ? a[p * m + i] : a[i * k + p];
        const double bv = tb ? b[j * k + p] : b[p * n + j];
        s += av * bv;
      }
      c[i * n + j] = static_cast<T>(s);
    }
}

struct BackendGuard {
  kernels::Backend saved = kernels::active_backend();
  ~BackendGuard() { kernels::set_backend(saved); }
};

}  // namespace

TEST_CASE("gemm matches the naive oracle in all four transpose modes") {
  std::mt19937_64 rng(11);
  const int m = 7, n = 13, k = 9;
  for (bool ta : {false, true})
    for (bool tb : {false, true})
      for (bool acc : {false, true}) {
        CAPTURE(ta);
        CAPTURE(tb);
        CAPTURE(acc);
        auto a = random_vec<double>(static_cast<std::size_t>(m) * k, rng);
        auto b = random_vec<double>(static_cast<std::size_t>(k) * n, rng);
        auto c0 = random_vec<double>(static_cast<std::size_t>(m) * n, rng);
        auto c1 = c0;
        kernels::gemm(ta, tb, m, n, k, a.data(), b.data(), c0.data(), acc);
        naive_gemm(ta, tb, m, n, k, a.data(), b.data(), c1.data(), acc);
        for (std::size_t i = 0; i < c0.size(); ++i)
          CHECK(c0[i] == doctest::Approx(c1[i]).epsilon(1e-12));
      }
}

TEST_CASE("float gemm agrees between scalar and avx2 backends") {
  if (!kernels::avx2_available()) return;
  BackendGuard guard;
  std::mt19937_64 rng(22);
  for (int m : {1, 5, 16})
    for (int n : {1, 8, 17})
      for (bool ta : {false, true})
        for (bool tb : {false, true}) {
          const int k = 11;
          auto a = random_vec<float>(static_cast<std::size_t>(m) * k, rng);
          auto b = random_vec<float>(static_cast<std::size_t>(k) * n, rng);
          std::vector<float> cs(static_cast<std::size_t>(m) * n),
              cv(static_cast<std::size_t>(m) * n);
          kernels::set_backend(kernels::Backend::Scalar);
          kernels::gemm(ta, tb, m, n, k, a.data(), b.data(), cs.data(), false);
          kernels::set_backend(kernels::Backend::Avx2);
          kernels::gemm(ta, tb, m, n, k, a.data(), b.data(), cv.data(), false);
          for (std::size_t i = 0; i < cs.size(); ++i)
            CHECK(cs[i] == doctest::Approx(cv[i]).epsilon(1e-5));
        }
}

TEST_CASE("elementwise kernels agree between backends and match formulas") {
  BackendGuard guard;
  std::mt19937_64 rng(33);
  const std::size_t n = 103;  // not a multiple of the vector width
  auto a = random_vec<float>(n, rng);
  auto b = random_vec<float>(n, rng);

  std::vector<kernels::Backend> backends{kernels::Backend::Scalar};
  if (kernels::avx2_available()) backends.push_back(kernels::Backend::Avx2);

  std::vector<std::vector<float>> add_out, axpy_out, scale_out;
  std::vector<double> sums, sumsqs;
  for (auto be : backends) {
    kernels::set_backend(be);
    std::vector<float> y(n);
    kernels::add(y.data(), a.data(), b.data(), n);
    add_out.push_back(y);
    y = a;
    kernels::axpy(y.data(), 0.37f, b.data(), n);
    axpy_out.push_back(y);
    y = a;
    kernels::scale(y.data(), -1.25f, n);
    scale_out.push_back(y);
    sums.push_back(kernels::reduce_sum(a.data(), n));
    sumsqs.push_back(kernels::reduce_sumsq(a.data(), n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(add_out[0][i] == doctest::Approx(a[i] + b[i]));
    CHECK(axpy_out[0][i] == doctest::Approx(a[i] + 0.37f * b[i]));
    CHECK(scale_out[0][i] == doctest::Approx(a[i] * -1.25f));
  }
  for (std::size_t v = 1; v < backends.size(); ++v) {
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(add_out[v][i] == add_out[0][i]);
      CHECK(axpy_out[v][i] == doctest::Approx(axpy_out[0][i]).epsilon(1e-6));
      CHECK(scale_out[v][i] == scale_out[0][i]);
    }
    CHECK(sums[v] == doctest::Approx(sums[0]).epsilon(1e-9));
    CHECK(sumsqs[v] == doctest::Approx(sumsqs[0]).epsilon(1e-9));
  }

  double ref_sum = 0.0, ref_sumsq = 0.0;
  for (float x : a) {
    ref_sum += x;
    ref_sumsq += static_cast<double>(x) * x;
  }
  CHECK(sums[0] == doctest::Approx(ref_sum).epsilon(1e-9));
  CHECK(sumsqs[0] == doctest::Approx(ref_sumsq).epsilon(1e-9));
}

TEST_CASE("adamw first step from zero moments") {
  // theta = 1, g = 1, lr = 0.1, wd = 0: bias-corrected m-hat = v-hat = 1, so
  // theta' = 1 - 0.1 / (1 + eps) ~= 0.9
  double p = 1.0, g = 1.0, m = 0.0, v = 0.0;
  kernels::adamw_update(&p, &g, &m, &v, 1, 0.1, 0.9, 0.999, 1e-8, 0.0, 0.1,
                        0.001);
  CHECK(p == doctest::Approx(0.9).epsilon(1e-6));
  CHECK(m == doctest::Approx(0.1));
  CHECK(v == doctest::Approx(0.001));

  // zero gradient, zero decay: parameter unchanged
  p = 2.5;
  g = 0.0;
  m = v = 0.0;
  kernels::adamw_update(&p, &g, &m, &v, 1, 0.1, 0.9, 0.999, 1e-8, 0.0, 0.1,
                        0.001);
  CHECK(p == 2.5);

  // zero gradient, decoupled decay only: theta * (1 - lr * wd)
  p = 2.0;
  g = 0.0;
  m = v = 0.0;
  kernels::adamw_update(&p, &g, &m, &v, 1, 0.1, 0.9, 0.999, 1e-8, 0.01, 0.1,
                        0.001);
  CHECK(p == doctest::Approx(2.0 * (1.0 - 0.1 * 0.01)));
}

TEST_CASE("adamw agrees between backends") {
  if (!kernels::avx2_available()) return;
  BackendGuard guard;
  std::mt19937_64 rng(44);
  const std::size_t n = 37;
  auto p0 = random_vec<float>(n, rng);
  auto g = random_vec<float>(n, rng);
  auto m0 = random_vec<float>(n, rng, 0.0, 0.1);
  auto v0 = random_vec<float>(n, rng, 0.0, 0.1);

  auto run = [&](kernels::Backend be) {
    kernels::set_backend(be);
    auto p = p0;
    auto m = m0;
    auto v = v0;
    kernels::adamw_update(p.data(), g.data(), m.data(), v.data(), n, 1e-3f,
                          0.9f, 0.999f, 1e-8f, 1e-4f, 0.1f, 0.001f);
    return std::tuple{p, m, v};
  };
  auto [ps, ms, vs] = run(kernels::Backend::Scalar);
  auto [pv, mv, vv] = run(kernels::Backend::Avx2);
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(pv[i] == doctest::Approx(ps[i]).epsilon(1e-6));
    CHECK(mv[i] == doctest::Approx(ms[i]).epsilon(1e-6));
    CHECK(vv[i] == doctest::Approx(vs[i]).epsilon(1e-6));
  }
}

TEST_CASE("gelu and sigmoid reference values and gradient") {
  double x = 0.0, y = 0.0;
  kernels::gelu(&y, &x, 1);
  CHECK(y == doctest::Approx(0.0));
  x = 10.0;
  kernels::gelu(&y, &x, 1);
  CHECK(y == doctest::Approx(10.0).epsilon(1e-6));  // identity for large x
  x = -10.0;
  kernels::gelu(&y, &x, 1);
  CHECK(y == doctest::Approx(0.0).epsilon(1e-4));

  kernels::sigmoid(&y, &x, 1);
  CHECK(y == doctest::Approx(1.0 / (1.0 + std::exp(10.0))));
  x = 0.0;
  kernels::sigmoid(&y, &x, 1);
  CHECK(y == doctest::Approx(0.5));

  // gelu_grad vs central difference of the forward
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 50; ++i) {
    const double x0 = u(rng);
    const double h = 1e-6, dy = 1.0;
    double yp = 0.0, ym = 0.0, dx = 0.0;
    double xp = x0 + h, xm = x0 - h;
    kernels::gelu(&yp, &xp, 1);
    kernels::gelu(&ym, &xm, 1);
    kernels::gelu_grad(&dx, &dy, &x0, 1);
    CHECK(dx == doctest::Approx((yp - ym) / (2 * h)).epsilon(1e-4));
  }
}

TEST_CASE("backend names and availability are consistent") {
  CHECK(std::string(kernels::backend_name(kernels::Backend::Scalar)) ==
        "scalar");
  CHECK(std::string(kernels::backend_name(kernels::Backend::Avx2)) == "avx2");
  if (!kernels::avx2_available())
    CHECK(kernels::active_backend() == kernels::Backend::Scalar);
}
