#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "lemon/kern/kernels.hpp"
#include "lemon/util/rng.hpp"

using namespace lemon;

namespace {

template <typename T>
std::vector<T> random_vec(Rng& rng, std::int64_t n, double lo = -1, double hi = 1) {
  std::vector<T> v(static_cast<size_t>(n));
  for (auto& x : v) x = static_cast<T>(rng.uniform(lo, hi));
  return v;
}

// Plain triple-loop oracle, written independently of the kernel code paths.
template <typename T>
void gemm_oracle(bool ta, bool tb, std::int64_t m, std::int64_t n, std::int64_t k, T alpha,
                 const std::vector<T>& a, std::int64_t lda, const std::vector<T>& b,
                 std::int64_t ldb, T beta, std::vector<T>& c, std::int64_t ldc) {
  for (std::int64_t i = 0; i < m; ++i)
    for (std::int64_t j = 0; j < n; ++j) {
      double acc = 0;
      for (std::int64_t p = 0; p < k; ++p) {
        const T av = ta ? a[static_cast<size_t>(p * lda + i)] : a[static_cast<size_t>(i * lda + p)];
        const T bv = tb ? b[static_cast<size_t>(j * ldb + p)] : b[static_cast<size_t>(p * ldb + j)];
        acc += double(av) * double(bv);
      }
      c[static_cast<size_t>(i * ldc + j)] =
          static_cast<T>(double(alpha) * acc + double(beta) * double(c[static_cast<size_t>(i * ldc + j)]));
    }
}

template <typename T>
void check_gemm_case(Rng& rng, kern::Backend backend, double tol) {
  const std::int64_t m = 1 + static_cast<std::int64_t>(rng.uniform_index(40));
  const std::int64_t n = 1 + static_cast<std::int64_t>(rng.uniform_index(40));
  const std::int64_t k = 1 + static_cast<std::int64_t>(rng.uniform_index(40));
  const bool ta = rng.uniform() < 0.5;
  const bool tb = rng.uniform() < 0.5;
  const T alpha = static_cast<T>(rng.uniform(-2, 2));
  const T beta = rng.uniform() < 0.5 ? T(0) : T(1);
  const std::int64_t lda = ta ? m : k;
  const std::int64_t ldb = tb ? k : n;
  auto a = random_vec<T>(rng, ta ? k * m : m * k);
  auto b = random_vec<T>(rng, tb ? n * k : k * n);
  auto c0 = random_vec<T>(rng, m * n);
  auto expect = c0;
  gemm_oracle(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, expect, n);

  kern::set_backend(backend);
  auto got = c0;
  kern::gemm(ta, tb, m, n, k, alpha, a.data(), lda, b.data(), ldb, beta, got.data(), n);
  kern::set_backend(kern::Backend::Auto);

  for (size_t i = 0; i < got.size(); ++i) {
    CHECK(std::abs(double(got[i]) - double(expect[i])) <=
          tol * (1.0 + std::abs(double(expect[i]))) * double(k));
  }
}

}  // namespace

TEST_CASE("gemm matches the triple-loop oracle on both backends") {
  Rng rng(7);
  for (int it = 0; it < 60; ++it) {
    check_gemm_case<float>(rng, kern::Backend::Scalar, 1e-6);
    check_gemm_case<double>(rng, kern::Backend::Scalar, 1e-14);
  }
  if (kern::cpu_has_avx2()) {
    for (int it = 0; it < 60; ++it) {
      check_gemm_case<float>(rng, kern::Backend::Avx2, 1e-6);
      check_gemm_case<double>(rng, kern::Backend::Avx2, 1e-14);
    }
  }
}

TEST_CASE("scalar and avx2 variants agree") {
  if (!kern::cpu_has_avx2()) return;
  Rng rng(11);
  for (int it = 0; it < 40; ++it) {
    const std::int64_t n = 1 + static_cast<std::int64_t>(rng.uniform_index(300));
    auto a = random_vec<float>(rng, n);
    auto b = random_vec<float>(rng, n);

    kern::set_backend(kern::Backend::Scalar);
    const float dot_s = kern::dot(a.data(), b.data(), n);
    const float sum_s = kern::vsum(a.data(), n);
    std::vector<float> add_s(a.size());
    kern::vadd(a.data(), b.data(), add_s.data(), n);
    auto y_s = b;
    kern::axpy(0.37f, a.data(), y_s.data(), n);

    kern::set_backend(kern::Backend::Avx2);
    const float dot_v = kern::dot(a.data(), b.data(), n);
    const float sum_v = kern::vsum(a.data(), n);
    std::vector<float> add_v(a.size());
    kern::vadd(a.data(), b.data(), add_v.data(), n);
    auto y_v = b;
    kern::axpy(0.37f, a.data(), y_v.data(), n);
    kern::set_backend(kern::Backend::Auto);

    CHECK(std::abs(dot_s - dot_v) <= 1e-5f * (1.f + std::abs(dot_s)));
    CHECK(std::abs(sum_s - sum_v) <= 1e-5f * (1.f + std::abs(sum_s)));
    CHECK(add_s == add_v);  // same op order, bit-exact
    for (size_t i = 0; i < y_s.size(); ++i)
      CHECK(std::abs(y_s[i] - y_v[i]) <= 1e-6f * (1.f + std::abs(y_s[i])));
  }
}

TEST_CASE("vmax returns the first maximum") {
  std::vector<double> v = {1.0, 5.0, 5.0, -2.0};
  std::int64_t arg = -1;
  CHECK(kern::vmax(v.data(), 4, &arg) == 5.0);
  CHECK(arg == 1);
}

TEST_CASE("gemm handles degenerate sizes") {
  std::vector<double> a = {2.0};
  std::vector<double> b = {3.0};
  std::vector<double> c = {100.0};
  kern::gemm(false, false, 1, 1, 1, 1.0, a.data(), 1, b.data(), 1, 0.0, c.data(), 1);
  CHECK(c[0] == 6.0);
  kern::gemm(false, false, 1, 1, 0, 1.0, a.data(), 1, b.data(), 1, 0.5, c.data(), 1);
  CHECK(c[0] == 3.0);
}
