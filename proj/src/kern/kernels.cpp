#include "lemon/kern/kernels.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <vector>

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#define LEMON_X86 1
#else
#define LEMON_X86 0
#endif

namespace lemon::kern {

namespace {

std::atomic<Backend> g_requested{Backend::Auto};

Backend detect() {
#if LEMON_X86 && (defined(__GNUC__) || defined(__clang__))
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Backend::Avx2;
#endif
  return Backend::Scalar;
}

Backend resolve() {
  Backend req = g_requested.load(std::memory_order_relaxed);
  if (req == Backend::Auto) {
    static Backend env_choice = [] {
      const char* e = std::getenv("LEMON_KERNEL");
      if (e) {
        if (std::strcmp(e, "scalar") == 0) return Backend::Scalar;
        if (std::strcmp(e, "avx2") == 0) return Backend::Avx2;
        if (std::strcmp(e, "auto") != 0)
          std::fprintf(stderr, "lemon: unknown LEMON_KERNEL value '%s', using auto\n", e);
      }
      return Backend::Auto;
    }();
    req = env_choice;
  }
  if (req == Backend::Auto) return detect();
  if (req == Backend::Avx2 && detect() != Backend::Avx2) return Backend::Scalar;
  return req;
}

// ---------------------------------------------------------------- scalar ---

template <typename T>
void gemm_nn_scalar(std::int64_t m, std::int64_t n, std::int64_t k, T alpha, const T* a,
                    std::int64_t lda, const T* b, std::int64_t ldb, T beta, T* c,
                    std::int64_t ldc) {
  for (std::int64_t i = 0; i < m; ++i) {
    T* crow = c + i * ldc;
    if (beta == T(0)) {
      for (std::int64_t j = 0; j < n; ++j) crow[j] = T(0);
    } else if (beta != T(1)) {
      for (std::int64_t j = 0; j < n; ++j) crow[j] *= beta;
    }
    for (std::int64_t p = 0; p < k; ++p) {
      const T av = alpha * a[i * lda + p];
      if (av == T(0)) continue;
      const T* brow = b + p * ldb;
      for (std::int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

template <typename T>
T dot_scalar(const T* a, const T* b, std::int64_t n) {
  T s = T(0);
  for (std::int64_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

template <typename T>
void axpy_scalar(T alpha, const T* x, T* y, std::int64_t n) {
  for (std::int64_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <typename T>
void scale_scalar(T alpha, T* x, std::int64_t n) {
  for (std::int64_t i = 0; i < n; ++i) x[i] *= alpha;
}

template <typename T>
void vadd_scalar(const T* a, const T* b, T* o, std::int64_t n) {
  for (std::int64_t i = 0; i < n; ++i) o[i] = a[i] + b[i];
}
template <typename T>
void vsub_scalar(const T* a, const T* b, T* o, std::int64_t n) {
  for (std::int64_t i = 0; i < n; ++i) o[i] = a[i] - b[i];
}
template <typename T>
void vmul_scalar(const T* a, const T* b, T* o, std::int64_t n) {
  for (std::int64_t i = 0; i < n; ++i) o[i] = a[i] * b[i];
}

template <typename T>
T vsum_scalar(const T* a, std::int64_t n) {
  T s = T(0);
  for (std::int64_t i = 0; i < n; ++i) s += a[i];
  return s;
}

template <typename T>
T vmax_scalar(const T* a, std::int64_t n, std::int64_t* argmax) {
  T best = a[0];
  std::int64_t bi = 0;
  for (std::int64_t i = 1; i < n; ++i)
    if (a[i] > best) {
      best = a[i];
      bi = i;
    }
  if (argmax) *argmax = bi;
  return best;
}

// ------------------------------------------------------------------ avx2 ---

#if LEMON_X86 && (defined(__GNUC__) || defined(__clang__))
#define LEMON_HAVE_AVX2_KERNELS 1
#define LEMON_TARGET_AVX2 __attribute__((target("avx2,fma")))

// 6x16 f32 microkernel: accumulates a full-K tile of C.
LEMON_TARGET_AVX2
static void mk_f32_6x16(std::int64_t k, const float* a, std::int64_t lda, const float* b,
                        std::int64_t ldb, float alpha, float beta, float* c,
                        std::int64_t ldc) {
  __m256 acc[6][2];
  for (int r = 0; r < 6; ++r)
    for (int v = 0; v < 2; ++v) acc[r][v] = _mm256_setzero_ps();
  for (std::int64_t p = 0; p < k; ++p) {
    const float* brow = b + p * ldb;
    const __m256 b0 = _mm256_loadu_ps(brow);
    const __m256 b1 = _mm256_loadu_ps(brow + 8);
    for (int r = 0; r < 6; ++r) {
      const __m256 av = _mm256_set1_ps(a[r * lda + p]);
      acc[r][0] = _mm256_fmadd_ps(av, b0, acc[r][0]);
      acc[r][1] = _mm256_fmadd_ps(av, b1, acc[r][1]);
    }
  }
  const __m256 va = _mm256_set1_ps(alpha);
  for (int r = 0; r < 6; ++r) {
    float* crow = c + r * ldc;
    __m256 c0 = _mm256_mul_ps(va, acc[r][0]);
    __m256 c1 = _mm256_mul_ps(va, acc[r][1]);
    if (beta != 0.0f) {
      const __m256 vb = _mm256_set1_ps(beta);
      c0 = _mm256_fmadd_ps(vb, _mm256_loadu_ps(crow), c0);
      c1 = _mm256_fmadd_ps(vb, _mm256_loadu_ps(crow + 8), c1);
    }
    _mm256_storeu_ps(crow, c0);
    _mm256_storeu_ps(crow + 8, c1);
  }
}

// 6x8 f64 microkernel.
LEMON_TARGET_AVX2
static void mk_f64_6x8(std::int64_t k, const double* a, std::int64_t lda, const double* b,
                       std::int64_t ldb, double alpha, double beta, double* c,
                       std::int64_t ldc) {
  __m256d acc[6][2];
  for (int r = 0; r < 6; ++r)
    for (int v = 0; v < 2; ++v) acc[r][v] = _mm256_setzero_pd();
  for (std::int64_t p = 0; p < k; ++p) {
    const double* brow = b + p * ldb;
    const __m256d b0 = _mm256_loadu_pd(brow);
    const __m256d b1 = _mm256_loadu_pd(brow + 4);
    for (int r = 0; r < 6; ++r) {
      const __m256d av = _mm256_set1_pd(a[r * lda + p]);
      acc[r][0] = _mm256_fmadd_pd(av, b0, acc[r][0]);
      acc[r][1] = _mm256_fmadd_pd(av, b1, acc[r][1]);
    }
  }
  const __m256d va = _mm256_set1_pd(alpha);
  for (int r = 0; r < 6; ++r) {
    double* crow = c + r * ldc;
    __m256d c0 = _mm256_mul_pd(va, acc[r][0]);
    __m256d c1 = _mm256_mul_pd(va, acc[r][1]);
    if (beta != 0.0) {
      const __m256d vb = _mm256_set1_pd(beta);
      c0 = _mm256_fmadd_pd(vb, _mm256_loadu_pd(crow), c0);
      c1 = _mm256_fmadd_pd(vb, _mm256_loadu_pd(crow + 4), c1);
    }
    _mm256_storeu_pd(crow, c0);
    _mm256_storeu_pd(crow + 4, c1);
  }
}

template <typename T>
struct MicroTile;
template <>
struct MicroTile<float> {
  static constexpr std::int64_t mr = 6, nr = 16;
  static constexpr auto kernel = mk_f32_6x16;
};
template <>
struct MicroTile<double> {
  static constexpr std::int64_t mr = 6, nr = 8;
  static constexpr auto kernel = mk_f64_6x8;
};

template <typename T>
void gemm_nn_avx2(std::int64_t m, std::int64_t n, std::int64_t k, T alpha, const T* a,
                  std::int64_t lda, const T* b, std::int64_t ldb, T beta, T* c,
                  std::int64_t ldc) {
  constexpr std::int64_t MR = MicroTile<T>::mr;
  constexpr std::int64_t NR = MicroTile<T>::nr;
  const std::int64_t m_main = m - m % MR;
  const std::int64_t n_main = n - n % NR;
  for (std::int64_t i = 0; i < m_main; i += MR)
    for (std::int64_t j = 0; j < n_main; j += NR)
      MicroTile<T>::kernel(k, a + i * lda, lda, b + j, ldb, alpha, beta, c + i * ldc + j, ldc);
  // edges fall back to the scalar core
  if (n_main < n)
    gemm_nn_scalar(m_main, n - n_main, k, alpha, a, lda, b + n_main, ldb, beta, c + n_main, ldc);
  if (m_main < m)
    gemm_nn_scalar(m - m_main, n, k, alpha, a + m_main * lda, lda, b, ldb, beta,
                   c + m_main * ldc, ldc);
}

LEMON_TARGET_AVX2
static float dot_avx2(const float* a, const float* b, std::int64_t n) {
  __m256 acc0 = _mm256_setzero_ps(), acc1 = _mm256_setzero_ps();
  std::int64_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
    acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 8), _mm256_loadu_ps(b + i + 8), acc1);
  }
  for (; i + 8 <= n; i += 8)
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
  acc0 = _mm256_add_ps(acc0, acc1);
  __m128 lo = _mm256_castps256_ps128(acc0);
  __m128 hi = _mm256_extractf128_ps(acc0, 1);
  __m128 s = _mm_add_ps(lo, hi);
  s = _mm_hadd_ps(s, s);
  s = _mm_hadd_ps(s, s);
  float out = _mm_cvtss_f32(s);
  for (; i < n; ++i) out += a[i] * b[i];
  return out;
}

LEMON_TARGET_AVX2
static double dot_avx2(const double* a, const double* b, std::int64_t n) {
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  std::int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  acc0 = _mm256_add_pd(acc0, acc1);
  __m128d lo = _mm256_castpd256_pd128(acc0);
  __m128d hi = _mm256_extractf128_pd(acc0, 1);
  __m128d s = _mm_add_pd(lo, hi);
  double out = _mm_cvtsd_f64(s) + _mm_cvtsd_f64(_mm_unpackhi_pd(s, s));
  for (; i < n; ++i) out += a[i] * b[i];
  return out;
}

LEMON_TARGET_AVX2
static void axpy_avx2(float alpha, const float* x, float* y, std::int64_t n) {
  const __m256 va = _mm256_set1_ps(alpha);
  std::int64_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

LEMON_TARGET_AVX2
static void axpy_avx2(double alpha, const double* x, double* y, std::int64_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::int64_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

LEMON_TARGET_AVX2
static void vadd_avx2(const float* a, const float* b, float* o, std::int64_t n) {
  std::int64_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(o + i, _mm256_add_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) o[i] = a[i] + b[i];
}
LEMON_TARGET_AVX2
static void vsub_avx2(const float* a, const float* b, float* o, std::int64_t n) {
  std::int64_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(o + i, _mm256_sub_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) o[i] = a[i] - b[i];
}
LEMON_TARGET_AVX2
static void vmul_avx2(const float* a, const float* b, float* o, std::int64_t n) {
  std::int64_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(o + i, _mm256_mul_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) o[i] = a[i] * b[i];
}
LEMON_TARGET_AVX2
static void vadd_avx2(const double* a, const double* b, double* o, std::int64_t n) {
  std::int64_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(o + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) o[i] = a[i] + b[i];
}
LEMON_TARGET_AVX2
static void vsub_avx2(const double* a, const double* b, double* o, std::int64_t n) {
  std::int64_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(o + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) o[i] = a[i] - b[i];
}
LEMON_TARGET_AVX2
static void vmul_avx2(const double* a, const double* b, double* o, std::int64_t n) {
  std::int64_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(o + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) o[i] = a[i] * b[i];
}

LEMON_TARGET_AVX2
static float vsum_avx2(const float* a, std::int64_t n) {
  __m256 acc = _mm256_setzero_ps();
  std::int64_t i = 0;
  for (; i + 8 <= n; i += 8) acc = _mm256_add_ps(acc, _mm256_loadu_ps(a + i));
  __m128 lo = _mm256_castps256_ps128(acc);
  __m128 hi = _mm256_extractf128_ps(acc, 1);
  __m128 s = _mm_add_ps(lo, hi);
  s = _mm_hadd_ps(s, s);
  s = _mm_hadd_ps(s, s);
  float out = _mm_cvtss_f32(s);
  for (; i < n; ++i) out += a[i];
  return out;
}
LEMON_TARGET_AVX2
static double vsum_avx2(const double* a, std::int64_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::int64_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  __m128d lo = _mm256_castpd256_pd128(acc);
  __m128d hi = _mm256_extractf128_pd(acc, 1);
  __m128d s = _mm_add_pd(lo, hi);
  double out = _mm_cvtsd_f64(s) + _mm_cvtsd_f64(_mm_unpackhi_pd(s, s));
  for (; i < n; ++i) out += a[i];
  return out;
}
#else
#define LEMON_HAVE_AVX2_KERNELS 0
#endif

// Transpose src (r x c, row-major, leading dim lds) into dst (c x r contiguous).
template <typename T>
void transpose_pack(const T* src, std::int64_t r, std::int64_t c, std::int64_t lds,
                    std::vector<T>& dst) {
  dst.resize(static_cast<size_t>(r) * c);
  for (std::int64_t i = 0; i < r; ++i)
    for (std::int64_t j = 0; j < c; ++j) dst[j * r + i] = src[i * lds + j];
}

template <typename T>
thread_local std::vector<T> tls_pack_a;
template <typename T>
thread_local std::vector<T> tls_pack_b;

}  // namespace

void set_backend(Backend b) { g_requested.store(b, std::memory_order_relaxed); }

Backend active_backend() { return resolve(); }

const char* backend_name() { return resolve() == Backend::Avx2 ? "avx2" : "scalar"; }

bool cpu_has_avx2() { return detect() == Backend::Avx2; }

template <typename T>
void gemm(bool trans_a, bool trans_b, std::int64_t m, std::int64_t n, std::int64_t k, T alpha,
          const T* a, std::int64_t lda, const T* b, std::int64_t ldb, T beta, T* c,
          std::int64_t ldc) {
  if (m <= 0 || n <= 0) return;
  if (k <= 0) {
    for (std::int64_t i = 0; i < m; ++i)
      for (std::int64_t j = 0; j < n; ++j) c[i * ldc + j] *= beta;
    return;
  }
  // Reduce transposed operands to the NN case via packing; pack cost is
  // O(mk + kn), negligible next to the O(mkn) multiply.
  const T* an = a;
  std::int64_t lda_n = lda;
  if (trans_a) {
    transpose_pack(a, k, m, lda, tls_pack_a<T>);
    an = tls_pack_a<T>.data();
    lda_n = k;
  }
  const T* bn = b;
  std::int64_t ldb_n = ldb;
  if (trans_b) {
    transpose_pack(b, n, k, ldb, tls_pack_b<T>);
    bn = tls_pack_b<T>.data();
    ldb_n = n;
  }
#if LEMON_HAVE_AVX2_KERNELS
  if (resolve() == Backend::Avx2) {
    gemm_nn_avx2(m, n, k, alpha, an, lda_n, bn, ldb_n, beta, c, ldc);
    return;
  }
#endif
  gemm_nn_scalar(m, n, k, alpha, an, lda_n, bn, ldb_n, beta, c, ldc);
}

template <typename T>
T dot(const T* a, const T* b, std::int64_t n) {
#if LEMON_HAVE_AVX2_KERNELS
  if (resolve() == Backend::Avx2) return dot_avx2(a, b, n);
#endif
  return dot_scalar(a, b, n);
}

template <typename T>
void axpy(T alpha, const T* x, T* y, std::int64_t n) {
#if LEMON_HAVE_AVX2_KERNELS
  if (resolve() == Backend::Avx2) {
    axpy_avx2(alpha, x, y, n);
    return;
  }
#endif
  axpy_scalar(alpha, x, y, n);
}

template <typename T>
void scale(T alpha, T* x, std::int64_t n) {
  scale_scalar(alpha, x, n);
}

template <typename T>
void vadd(const T* a, const T* b, T* o, std::int64_t n) {
#if LEMON_HAVE_AVX2_KERNELS
  if (resolve() == Backend::Avx2) {
    vadd_avx2(a, b, o, n);
    return;
  }
#endif
  vadd_scalar(a, b, o, n);
}

template <typename T>
void vsub(const T* a, const T* b, T* o, std::int64_t n) {
#if LEMON_HAVE_AVX2_KERNELS
  if (resolve() == Backend::Avx2) {
    vsub_avx2(a, b, o, n);
    return;
  }
#endif
  vsub_scalar(a, b, o, n);
}

template <typename T>
void vmul(const T* a, const T* b, T* o, std::int64_t n) {
#if LEMON_HAVE_AVX2_KERNELS
  if (resolve() == Backend::Avx2) {
    vmul_avx2(a, b, o, n);
    return;
  }
#endif
  vmul_scalar(a, b, o, n);
}

template <typename T>
T vsum(const T* a, std::int64_t n) {
  if (n <= 0) return T(0);
#if LEMON_HAVE_AVX2_KERNELS
  if (resolve() == Backend::Avx2) return vsum_avx2(a, n);
#endif
  return vsum_scalar(a, n);
}

template <typename T>
T vmax(const T* a, std::int64_t n, std::int64_t* argmax) {
  return vmax_scalar(a, n, argmax);
}

#define LEMON_INSTANTIATE(T)                                                                   \
  template void gemm<T>(bool, bool, std::int64_t, std::int64_t, std::int64_t, T, const T*,     \
                        std::int64_t, const T*, std::int64_t, T, T*, std::int64_t);            \
  template T dot<T>(const T*, const T*, std::int64_t);                                         \
  template void axpy<T>(T, const T*, T*, std::int64_t);                                        \
  template void scale<T>(T, T*, std::int64_t);                                                 \
  template void vadd<T>(const T*, const T*, T*, std::int64_t);                                 \
  template void vsub<T>(const T*, const T*, T*, std::int64_t);                                 \
  template void vmul<T>(const T*, const T*, T*, std::int64_t);                                 \
  template T vsum<T>(const T*, std::int64_t);                                                  \
  template T vmax<T>(const T*, std::int64_t, std::int64_t*);

LEMON_INSTANTIATE(float)
LEMON_INSTANTIATE(double)
#undef LEMON_INSTANTIATE

}  // namespace lemon::kern
