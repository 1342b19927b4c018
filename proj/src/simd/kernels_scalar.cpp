#include <algorithm>

#include "deskservo/simd/kernels.hpp"

namespace deskservo::simd {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_scalar(const double* w, const double* x, const double* b, double* y, std::size_t rows,
                 std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = b[r] + dot_scalar(w + r * cols, x, cols);
}

void gemv_t_acc_scalar(const double* w, const double* g, double* x, std::size_t rows,
                       std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) axpy_scalar(g[r], w + r * cols, x, cols);
}

void outer_acc_scalar(const double* g, const double* x, double* w, std::size_t rows,
                      std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) axpy_scalar(g[r], x, w + r * cols, cols);
}

void momentum_step_scalar(double* param, double* vel, const double* grad, double lr, double mu,
                          double scale, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    vel[i] = mu * vel[i] + scale * grad[i];
    param[i] -= lr * vel[i];
  }
}

void affine_clip_scalar(double* px, double gain, double offset, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) px[i] = std::clamp(gain * px[i] + offset, 0.0, 1.0);
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{
      "scalar",         dot_scalar,           axpy_scalar,       gemv_scalar, gemv_t_acc_scalar,
      outer_acc_scalar, momentum_step_scalar, affine_clip_scalar,
  };
  return table;
}

}  // namespace deskservo::simd
