#include <algorithm>

#include "deskservo/data.hpp"

namespace deskservo::data {

std::vector<OrientationLabel> label_orientations(std::span<const WanderFrame> log,
                                                 const LabelConfig& config) {
  std::vector<OrientationLabel> labels;
  const double tol = 0.5 * config.dt;
  for (std::size_t i = 0; i < log.size(); ++i) {
    const WanderFrame& a = log[i];
    if (!a.box || !a.crop || a.spinning) continue;
    const double target = a.t + config.dt;
    auto it = std::lower_bound(log.begin() + static_cast<std::ptrdiff_t>(i) + 1, log.end(), target,
                               [](const WanderFrame& f, double t) { return f.t < t; });
    const std::size_t hi = static_cast<std::size_t>(it - log.begin());
    std::size_t j = hi;
    if (hi - 1 > i && (hi == log.size() || std::abs(log[hi - 1].t - target) <= std::abs(log[hi].t - target)))
      j = hi - 1;
    if (j >= log.size()) continue;
    const WanderFrame& b = log[j];
    if (std::abs(b.t - target) > tol || !b.box) continue;
    bool spun = false;
    for (std::size_t k = i; k < j && !spun; ++k) spun = log[k].spinning;
    if (spun) continue;
    const ImagePoint d = b.box->center - a.box->center;
    const double len = norm(d);
    if (len < config.tau) continue;
    labels.push_back({a.t, *a.crop, Angle(std::atan2(d.v, d.u)), len});
  }
  return labels;
}

}  // namespace deskservo::data
