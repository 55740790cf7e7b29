#include "brl/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

#include <algorithm>
#include <cstring>

namespace brl::kern {
namespace {

void gemm_neon(std::size_t m, std::size_t n, std::size_t k, const double* a,
               std::size_t lda, const double* b, std::size_t ldb, double* c,
               std::size_t ldc, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * ldc;
    if (!accumulate) std::memset(crow, 0, n * sizeof(double));
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * lda + p];
      if (av == 0.0) continue;
      const double* brow = b + p * ldb;
      const float64x2_t va = vdupq_n_f64(av);
      std::size_t j = 0;
      for (; j + 2 <= n; j += 2) {
        float64x2_t vc = vld1q_f64(crow + j);
        vc = vfmaq_f64(vc, va, vld1q_f64(brow + j));
        vst1q_f64(crow + j, vc);
      }
      for (; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void gemm_tn_neon(std::size_t m, std::size_t n, std::size_t k, const double* a,
                  std::size_t lda, const double* b, std::size_t ldb, double* c,
                  std::size_t ldc, bool accumulate) {
  if (!accumulate)
    for (std::size_t i = 0; i < m; ++i)
      std::memset(c + i * ldc, 0, n * sizeof(double));
  for (std::size_t p = 0; p < k; ++p) {
    const double* arow = a + p * lda;
    const double* brow = b + p * ldb;
    for (std::size_t i = 0; i < m; ++i) {
      const double av = arow[i];
      if (av == 0.0) continue;
      double* crow = c + i * ldc;
      const float64x2_t va = vdupq_n_f64(av);
      std::size_t j = 0;
      for (; j + 2 <= n; j += 2) {
        float64x2_t vc = vld1q_f64(crow + j);
        vc = vfmaq_f64(vc, va, vld1q_f64(brow + j));
        vst1q_f64(crow + j, vc);
      }
      for (; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void axpy_neon(std::size_t n, double alpha, const double* x, double* y) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t vy = vld1q_f64(y + i);
    vy = vfmaq_f64(vy, va, vld1q_f64(x + i));
    vst1q_f64(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void sub_neon(std::size_t n, const double* x, const double* y, double* z) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(z + i, vsubq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
  for (; i < n; ++i) z[i] = x[i] - y[i];
}

void scale_neon(std::size_t n, double alpha, const double* x, double* y) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(y + i, vmulq_f64(va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] = alpha * x[i];
}

void relu_neon(std::size_t n, const double* x, double* y) {
  const float64x2_t vz = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(y + i, vmaxq_f64(vld1q_f64(x + i), vz));
  for (; i < n; ++i) y[i] = std::max(x[i], 0.0);
}

void relu_backward_neon(std::size_t n, const double* pre, double* g) {
  const float64x2_t vz = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const uint64x2_t mask = vcgtq_f64(vld1q_f64(pre + i), vz);
    const uint64x2_t gv =
        vandq_u64(vreinterpretq_u64_f64(vld1q_f64(g + i)), mask);
    vst1q_f64(g + i, vreinterpretq_f64_u64(gv));
  }
  for (; i < n; ++i)
    if (!(pre[i] > 0.0)) g[i] = 0.0;
}

double sum_neon(std::size_t n, const double* x) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(x + i));
  double s = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) s += x[i];
  return s;
}

}  // namespace

const Backend* neon_backend() {
  static const Backend b{"neon",        gemm_neon,  gemm_tn_neon,
                         axpy_neon,     sub_neon,   scale_neon,
                         relu_neon,     relu_backward_neon, sum_neon};
  return &b;
}

}  // namespace brl::kern

#else

namespace brl::kern {
const Backend* neon_backend() { return nullptr; }
}  // namespace brl::kern

#endif
