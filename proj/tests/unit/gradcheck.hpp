#pragma once

// Central finite differences of the total loss, compared against the
// analytic gradient.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "deskservo/estimator.hpp"

namespace gradcheck {

using namespace deskservo;
using namespace deskservo::estimator;

struct Case {
  Model model;
  Crop crop;
  Angle phi;
  double alpha;
};

/// Seeded random case with logits spread enough to avoid saturation.
inline Case random_case(HeadKind kind, const NetworkShape& shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Model m(kind, shape);
  const double in_scale = 1.5 / std::sqrt(static_cast<double>(shape.inputs()));
  std::size_t i = 0;
  for (double& w : m.params()) {
    const bool first_layer = i < static_cast<std::size_t>(shape.hidden) * (shape.inputs() + 1);
    w = g(rng) * (first_layer ? in_scale : 0.8);
    ++i;
  }
  Crop crop(shape.crop_size);
  for (double& x : crop.pixels()) x = u(rng);
  return {std::move(m), std::move(crop), Angle(u(rng) * kTwoPi), 0.25 + 2.0 * u(rng)};
}

inline double loss_at(const Model& m, const Case& c) {
  return loss_total(c.phi, run_network(m, c.crop), m.bins(), c.alpha);
}

struct Result {
  double relative_error = 0.0;  // ‖analytic − numeric‖ / max(‖analytic‖, ‖numeric‖)
  std::size_t coordinates = 0;
};

/// Compares over `coords` (every parameter when empty).
inline Result check(const Case& c, std::vector<std::size_t> coords = {}, double h = 1e-6) {
  const Gradient analytic = backward(c.model, c.crop, c.phi, c.alpha);
  if (coords.empty()) {
    coords.resize(analytic.values.size());
    for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = i;
  }
  Model m = c.model;
  double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
  for (std::size_t i : coords) {
    const double keep = m.params()[i];
    m.params()[i] = keep + h;
    const double up = loss_at(m, c);
    m.params()[i] = keep - h;
    const double down = loss_at(m, c);
    m.params()[i] = keep;
    const double numeric = (up - down) / (2.0 * h);
    const double a = analytic.values[i];
    diff2 += (a - numeric) * (a - numeric);
    a2 += a * a;
    n2 += numeric * numeric;
  }
  const double scale = std::max({std::sqrt(a2), std::sqrt(n2), 1e-300});
  return {std::sqrt(diff2) / scale, coords.size()};
}

/// Every bias plus a seeded sample of each weight matrix.
inline std::vector<std::size_t> sampled_coords(const Model& m, std::size_t per_matrix,
                                               std::uint64_t seed) {
  const std::size_t n_w1 = m.w1().size(), n_b1 = m.b1().size(), n_w2 = m.w2().size();
  std::vector<std::size_t> out;
  std::mt19937_64 rng(seed);
  auto sample = [&](std::size_t begin, std::size_t count) {
    std::uniform_int_distribution<std::size_t> pick(begin, begin + count - 1);
    for (std::size_t k = 0; k < per_matrix; ++k) out.push_back(pick(rng));
  };
  sample(0, n_w1);
  for (std::size_t i = n_w1; i < n_w1 + n_b1; ++i) out.push_back(i);
  sample(n_w1 + n_b1, n_w2);
  for (std::size_t i = n_w1 + n_b1 + n_w2; i < m.params().size(); ++i) out.push_back(i);
  return out;
}

}  // namespace gradcheck
