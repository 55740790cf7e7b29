#pragma once

#include <cstddef>
#include <string>

// Low-level numeric kernels with a scalar reference implementation and
// SIMD variants (AVX2 on x86-64, NEON on aarch64) selected at runtime.
// All matrices are row-major, double precision.

namespace brl::kern {

struct Backend {
  const char* name;

  // C[m,n] (+)= sum_k A[m,k] * B[k,n].  A: M x K (lda), B: K x N (ldb),
  // C: M x N (ldc).  accumulate=false zeroes C first.
  void (*gemm)(std::size_t m, std::size_t n, std::size_t k, const double* a,
               std::size_t lda, const double* b, std::size_t ldb, double* c,
               std::size_t ldc, bool accumulate);

  // C[m,n] (+)= sum_k A[k,m] * B[k,n]  (A transposed).  A: K x M (lda),
  // B: K x N (ldb), C: M x N (ldc).
  void (*gemm_tn)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                  std::size_t lda, const double* b, std::size_t ldb, double* c,
                  std::size_t ldc, bool accumulate);

  // y[i] += alpha * x[i]
  void (*axpy)(std::size_t n, double alpha, const double* x, double* y);

  // z[i] = x[i] - y[i]
  void (*sub)(std::size_t n, const double* x, const double* y, double* z);

  // y[i] = alpha * x[i]
  void (*scale)(std::size_t n, double alpha, const double* x, double* y);

  // y[i] = max(x[i], 0)
  void (*relu)(std::size_t n, const double* x, double* y);

  // g[i] = pre[i] > 0 ? g[i] : 0
  void (*relu_backward)(std::size_t n, const double* pre, double* g);

  // sum of x[0..n)
  double (*sum)(std::size_t n, const double* x);
};

const Backend& scalar();

// Best SIMD backend compiled in and supported by this CPU, or nullptr.
const Backend* simd();

// Active backend: simd() when available unless the BRL_KERNELS=scalar
// environment variable forces the reference path.
const Backend& active();

std::string active_name();

}  // namespace brl::kern
