#pragma once

// Dense double-precision kernels used by the orientation network and the
// augmentation path. Each kernel has a scalar reference implementation and
// optional ISA-specific variants; one table is selected at first use.
//
// Selection: AVX2+FMA when compiled in and reported by the CPU, scalar
// otherwise. DESKSERVO_SIMD=scalar in the environment forces the reference
// path. Variants agree with the reference to rounding (different summation
// order), so results are reproducible per machine, not across ISAs.

#include <cstddef>
#include <span>
#include <string_view>

namespace deskservo::simd {

struct KernelTable {
  std::string_view name;

  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y = W x + b, W row-major rows x cols
  void (*gemv)(const double* w, const double* x, const double* b, double* y, std::size_t rows,
               std::size_t cols);
  // x += W^T g
  void (*gemv_t_acc)(const double* w, const double* g, double* x, std::size_t rows,
                     std::size_t cols);
  // W += g x^T
  void (*outer_acc)(const double* g, const double* x, double* w, std::size_t rows,
                    std::size_t cols);
  // vel = mu * vel + scale * grad; param -= lr * vel
  void (*momentum_step)(double* param, double* vel, const double* grad, double lr, double mu,
                        double scale, std::size_t n);
  // px = clamp(gain * px + offset, 0, 1)
  void (*affine_clip)(double* px, double gain, double offset, std::size_t n);
};

const KernelTable& scalar_kernels();
/// nullptr when not compiled in or not supported by this CPU.
const KernelTable* avx2_kernels();
/// The table every caller uses.
const KernelTable& active();

// Span-based wrappers over the active table.
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void gemv(std::span<const double> w, std::span<const double> x, std::span<const double> b,
          std::span<double> y);
void gemv_t_acc(std::span<const double> w, std::span<const double> g, std::span<double> x);
void outer_acc(std::span<const double> g, std::span<const double> x, std::span<double> w);
void momentum_step(std::span<double> param, std::span<double> vel, std::span<const double> grad,
                   double lr, double mu, double scale);
void affine_clip(std::span<double> px, double gain, double offset);

}  // namespace deskservo::simd
