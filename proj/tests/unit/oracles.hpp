#pragma once

// Independent reference computations used as test oracles. Nothing here
// calls into the library's geometry or estimator math.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

inline constexpr double kPi = std::numbers::pi;

/// Look-at pinhole camera at (x, y, h) aimed at the floor point
/// (x, y + h·tan ψ, 0), image axes right/down, principal point centered.
struct Pinhole {
  Eigen::Vector3d center;
  Eigen::Matrix3d rows;  // right, down, forward
  double f, cx, cy;

  Pinhole(double h, double tilt, double focal, int w, int hpx, double x = 0.0, double y = 0.0)
      : center(x, y, h), f(focal), cx(w / 2.0), cy(hpx / 2.0) {
    const Eigen::Vector3d target(x, y + h * std::tan(tilt), 0.0);
    const Eigen::Vector3d forward = (target - center).normalized();
    const Eigen::Vector3d up(0.0, 0.0, 1.0);
    const Eigen::Vector3d right = forward.cross(up).normalized();
    const Eigen::Vector3d down = forward.cross(right);
    rows.row(0) = right;
    rows.row(1) = down;
    rows.row(2) = forward;
  }

  Eigen::Vector2d project(double gx, double gy) const {
    const Eigen::Vector3d c = rows * (Eigen::Vector3d(gx, gy, 0.0) - center);
    return {f * c.x() / c.z() + cx, f * c.y() / c.z() + cy};
  }

  /// Floor point seen at pixel (u, v): ray from the center hits z = 0.
  Eigen::Vector2d unproject(double u, double v) const {
    const Eigen::Vector3d dir = rows.transpose() * Eigen::Vector3d((u - cx) / f, (v - cy) / f, 1.0);
    const double t = -center.z() / dir.z();
    return {center.x() + t * dir.x(), center.y() + t * dir.y()};
  }
};

/// Distance from p to segment ab: dense sampling brackets the minimum,
/// ternary search on the convex distance refines it.
inline double sampled_segment_distance(Eigen::Vector2d p, Eigen::Vector2d a, Eigen::Vector2d b,
                                       int n = 10000) {
  auto dist = [&](double t) { return (p - (a + (b - a) * t)).norm(); };
  int best_i = 0;
  for (int i = 1; i <= n; ++i)
    if (dist(double(i) / n) < dist(double(best_i) / n)) best_i = i;
  double lo = std::max(0.0, (best_i - 1.0) / n), hi = std::min(1.0, (best_i + 1.0) / n);
  for (int k = 0; k < 200; ++k) {
    const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
    if (dist(m1) < dist(m2)) hi = m2; else lo = m1;
  }
  return std::min({dist(0.5 * (lo + hi)), dist(0.0), dist(1.0)});
}

/// Wrap-aware absolute angular difference by explicit case analysis.
inline double abs_angle_diff(double a, double b) {
  double d = std::fmod(std::abs(a - b), 2.0 * kPi);
  return d > kPi ? 2.0 * kPi - d : d;
}

/// Euler integration of the unicycle with many substeps.
inline Eigen::Vector3d euler_unicycle(Eigen::Vector3d pose, double v, double w, double dt,
                                      int substeps = 200000) {
  const double h = dt / substeps;
  for (int i = 0; i < substeps; ++i) {
    pose.x() += v * std::cos(pose.z()) * h;
    pose.y() += v * std::sin(pose.z()) * h;
    pose.z() += w * h;
  }
  return pose;
}

/// Ray-casting point-in-polygon for points clearly off the boundary.
inline bool ray_cast_inside(const std::vector<Eigen::Vector2d>& poly, Eigen::Vector2d p) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const auto& a = poly[i];
    const auto& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y()) &&
        p.x() < (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x())
      inside = !inside;
  }
  return inside;
}

/// Max-shifted softmax.
inline std::vector<double> softmax(const std::vector<double>& z) {
  double m = z[0];
  for (double x : z) m = std::max(m, x);
  std::vector<double> p(z.size());
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) s += p[i] = std::exp(z[i] - m);
  for (double& x : p) x /= s;
  return p;
}

/// Mean direction of a distribution over K equal bins as a complex sum,
/// in [0, 2π).
inline double mean_direction(const std::vector<double>& p) {
  std::complex<double> acc = 0.0;
  const double step = 2.0 * kPi / static_cast<double>(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) acc += p[i] * std::polar(1.0, step * static_cast<double>(i));
  const double a = std::arg(acc);
  return a < 0.0 ? a + 2.0 * kPi : a;
}

/// Squared wrap-aware residual by brute force over shifted copies.
inline double wrapped_sq(double phi, double est) {
  double best = INFINITY;
  for (int k = -2; k <= 2; ++k) best = std::min(best, std::pow(phi + 2.0 * kPi * k - est, 2));
  return best;
}

/// Index of the bin nearest to phi by scanning every center.
inline std::size_t nearest_bin(double phi, std::size_t k) {
  const double step = 2.0 * kPi / static_cast<double>(k);
  std::size_t best = 0;
  double best_d = INFINITY;
  for (std::size_t i = 0; i < k; ++i) {
    const double d = abs_angle_diff(phi, step * static_cast<double>(i));
    if (d < best_d - 1e-12) {
      best = i;
      best_d = d;
    }
  }
  return best;
}

}  // namespace oracle
