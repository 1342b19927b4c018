#include <algorithm>
#include <cmath>

#include "deskservo/data.hpp"
#include "deskservo/simd/kernels.hpp"

namespace deskservo::data {

AugmentationParams AugmentationParams::none() {
  AugmentationParams p;
  p.p_brightness = p.p_contrast = p.p_blur = p.p_noise = 0.0;
  return p;
}

void adjust_brightness(Crop& crop, double delta) { simd::affine_clip(crop.pixels(), 1.0, delta); }

void adjust_contrast(Crop& crop, double factor) {
  simd::affine_clip(crop.pixels(), factor, 0.5 * (1.0 - factor));
}

namespace {

// Half-sample symmetric extension: ... c b a | a b c ... | c b a ...
int reflect(int i, int n) {
  const int period = 2 * n;
  int m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - 1 - m;
}

}  // namespace

void gaussian_blur(Crop& crop, double sigma) {
  if (!(sigma > 0.0)) return;
  const int n = crop.size();
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    kernel[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma));
    sum += kernel[k + radius];
  }
  for (double& w : kernel) w /= sum;

  std::vector<double> tmp(static_cast<std::size_t>(n) * n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) acc += kernel[k + radius] * crop.at(r, reflect(c + k, n));
      tmp[static_cast<std::size_t>(r) * n + c] = acc;
    }
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k)
        acc += kernel[k + radius] * tmp[static_cast<std::size_t>(reflect(r + k, n)) * n + c];
      crop.at(r, c) = acc;
    }
}

Crop augment(const Crop& crop, const AugmentationParams& params, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double gate_b = unit(rng), gate_c = unit(rng), gate_blur = unit(rng), gate_n = unit(rng);
  const double draw_b = unit(rng), draw_c = unit(rng), draw_blur = unit(rng);

  Crop out = crop;
  if (gate_b < params.p_brightness)
    adjust_brightness(out, (2.0 * draw_b - 1.0) * params.brightness_delta);
  if (gate_c < params.p_contrast)
    adjust_contrast(out, params.contrast_min + draw_c * (params.contrast_max - params.contrast_min));
  if (gate_blur < params.p_blur)
    gaussian_blur(out, params.blur_sigma_min +
                           draw_blur * (params.blur_sigma_max - params.blur_sigma_min));
  const bool noisy = gate_n < params.p_noise;
  for (double& px : out.pixels()) {
    const double z = gauss(rng);
    if (noisy) px = std::clamp(px + params.noise_sigma * z, 0.0, 1.0);
  }
  return out;
}

}  // namespace deskservo::data
