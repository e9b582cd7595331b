#pragma once

// Dense numeric kernels used by every hot loop in the project: GEMM,
// dot products and elementwise vector ops. Each kernel has a scalar
// reference implementation and an AVX2+FMA variant; the active variant
// is picked once at runtime (CPU detection, overridable through the
// LEMON_KERNEL environment variable or set_backend()).

#include <cstdint>

namespace lemon::kern {

enum class Backend { Auto, Scalar, Avx2 };

// Force a backend (tests use this to compare variants). Auto re-detects.
void set_backend(Backend b);
// Backend that calls are currently routed to (never Auto).
Backend active_backend();
const char* backend_name();
bool cpu_has_avx2();

// Row-major GEMM: C = alpha * op(A) @ op(B) + beta * C, where op is an
// optional transpose. A is m x k after op, B is k x n after op, C is m x n.
template <typename T>
void gemm(bool trans_a, bool trans_b, std::int64_t m, std::int64_t n, std::int64_t k,
          T alpha, const T* a, std::int64_t lda, const T* b, std::int64_t ldb,
          T beta, T* c, std::int64_t ldc);

template <typename T> T dot(const T* a, const T* b, std::int64_t n);

// y += alpha * x
template <typename T> void axpy(T alpha, const T* x, T* y, std::int64_t n);
template <typename T> void scale(T alpha, T* x, std::int64_t n);

template <typename T> void vadd(const T* a, const T* b, T* out, std::int64_t n);
template <typename T> void vsub(const T* a, const T* b, T* out, std::int64_t n);
template <typename T> void vmul(const T* a, const T* b, T* out, std::int64_t n);

template <typename T> T vsum(const T* a, std::int64_t n);
// Max value; if argmax is non-null it receives the index of the first maximum.
template <typename T> T vmax(const T* a, std::int64_t n, std::int64_t* argmax);

}  // namespace lemon::kern
