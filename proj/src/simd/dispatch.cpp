#include <cassert>
#include <cstdlib>
#include <cstring>

#include "deskservo/simd/kernels.hpp"

namespace deskservo::simd {

#if defined(DESKSERVO_HAVE_AVX2)
const KernelTable* avx2_table_if_compiled();
#endif

const KernelTable* avx2_kernels() {
#if defined(DESKSERVO_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? avx2_table_if_compiled() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() {
  static const KernelTable& table = [] () -> const KernelTable& {
    const char* forced = std::getenv("DESKSERVO_SIMD");
    if (forced != nullptr && std::strcmp(forced, "scalar") == 0) return scalar_kernels();
    if (const KernelTable* t = avx2_kernels()) return *t;
    return scalar_kernels();
  }();
  return table;
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active().dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  active().axpy(alpha, x.data(), y.data(), x.size());
}

void gemv(std::span<const double> w, std::span<const double> x, std::span<const double> b,
          std::span<double> y) {
  assert(b.size() == y.size() && w.size() == y.size() * x.size());
  active().gemv(w.data(), x.data(), b.data(), y.data(), y.size(), x.size());
}

void gemv_t_acc(std::span<const double> w, std::span<const double> g, std::span<double> x) {
  assert(w.size() == g.size() * x.size());
  active().gemv_t_acc(w.data(), g.data(), x.data(), g.size(), x.size());
}

void outer_acc(std::span<const double> g, std::span<const double> x, std::span<double> w) {
  assert(w.size() == g.size() * x.size());
  active().outer_acc(g.data(), x.data(), w.data(), g.size(), x.size());
}

void momentum_step(std::span<double> param, std::span<double> vel, std::span<const double> grad,
                   double lr, double mu, double scale) {
  assert(param.size() == vel.size() && vel.size() == grad.size());
  active().momentum_step(param.data(), vel.data(), grad.data(), lr, mu, scale, param.size());
}

void affine_clip(std::span<double> px, double gain, double offset) {
  active().affine_clip(px.data(), gain, offset, px.size());
}

}  // namespace deskservo::simd
