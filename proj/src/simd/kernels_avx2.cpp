// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include <algorithm>

#include "deskservo/simd/kernels.hpp"

namespace deskservo::simd {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  __m256d acc2 = _mm256_setzero_pd();
  __m256d acc3 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 8), _mm256_loadu_pd(b + i + 8), acc2);
    acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 12), _mm256_loadu_pd(b + i + 12), acc3);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double acc = hsum(_mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3)));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    _mm256_storeu_pd(y + i + 4,
                     _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4)));
  }
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_avx2(const double* w, const double* x, const double* b, double* y, std::size_t rows,
               std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = b[r] + dot_avx2(w + r * cols, x, cols);
}

void gemv_t_acc_avx2(const double* w, const double* g, double* x, std::size_t rows,
                     std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (g[r] != 0.0) axpy_avx2(g[r], w + r * cols, x, cols);
  }
}

void outer_acc_avx2(const double* g, const double* x, double* w, std::size_t rows,
                    std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (g[r] != 0.0) axpy_avx2(g[r], x, w + r * cols, cols);
  }
}

void momentum_step_avx2(double* param, double* vel, const double* grad, double lr, double mu,
                        double scale, std::size_t n) {
  const __m256d vmu = _mm256_set1_pd(mu);
  const __m256d vscale = _mm256_set1_pd(scale);
  const __m256d vneg_lr = _mm256_set1_pd(-lr);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_fmadd_pd(vmu, _mm256_loadu_pd(vel + i),
                                      _mm256_mul_pd(vscale, _mm256_loadu_pd(grad + i)));
    _mm256_storeu_pd(vel + i, v);
    _mm256_storeu_pd(param + i, _mm256_fmadd_pd(vneg_lr, v, _mm256_loadu_pd(param + i)));
  }
  for (; i < n; ++i) {
    vel[i] = mu * vel[i] + scale * grad[i];
    param[i] -= lr * vel[i];
  }
}

void affine_clip_avx2(double* px, double gain, double offset, std::size_t n) {
  const __m256d vg = _mm256_set1_pd(gain);
  const __m256d vo = _mm256_set1_pd(offset);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_fmadd_pd(vg, _mm256_loadu_pd(px + i), vo);
    _mm256_storeu_pd(px + i, _mm256_min_pd(_mm256_max_pd(v, zero), one));
  }
  for (; i < n; ++i) px[i] = std::clamp(gain * px[i] + offset, 0.0, 1.0);
}

}  // namespace

const KernelTable* avx2_table_if_compiled() {
  static const KernelTable table{
      "avx2-fma",     dot_avx2,           axpy_avx2,       gemv_avx2, gemv_t_acc_avx2,
      outer_acc_avx2, momentum_step_avx2, affine_clip_avx2,
  };
  return &table;
}

}  // namespace deskservo::simd
