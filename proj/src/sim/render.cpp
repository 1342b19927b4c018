#include <algorithm>
#include <array>

#include <Eigen/LU>

#include "deskservo/sim.hpp"

namespace deskservo::sim {

namespace {

constexpr double kBackground = 0.35;
constexpr double kChassis = 0.6;
constexpr double kWedge = 0.92;
constexpr double kNotch = 0.08;
constexpr int kSupersample = 2;
constexpr int kClutterBlobs = 4;
constexpr double kPixelNoise = 0.08;

// Glyph in body coordinates scaled by the footprint radius (x forward).
// Returns a negative value outside the footprint.
double glyph(double bx, double by) {
  const double r2 = bx * bx + by * by;
  if (r2 > 1.0) return -1.0;
  const double nx = bx - 0.55;
  if (nx * nx + by * by < 0.17 * 0.17) return kNotch;
  // Wedge: tip at (0.95, 0), base edge at x = -0.6 spanning |y| <= 0.6.
  if (bx >= -0.6 && bx <= 0.95) {
    const double half = 0.6 * (0.95 - bx) / 1.55;
    if (std::abs(by) <= half) return kWedge;
  }
  return kChassis;
}

struct Blob {
  double u, v, radius, amplitude;
};

}  // namespace

Crop::Crop(int size, std::vector<double> pixels) : size_(size), pixels_(std::move(pixels)) {
  if (size <= 0 || pixels_.size() != static_cast<std::size_t>(size) * size)
    throw Error(ErrorCode::ShapeMismatch, "crop pixel count does not match its size");
}

CropWindow crop_window_for(const BoundingBox& box) {
  return {box.center, 1.25 * std::max(box.width, box.height)};
}

Crop render_crop(const Pose2D& pose, const CameraModel& cam, const RobotParams& params,
                 const CropStyle& style, Rng& rng, std::optional<CropWindow> window) {
  const int n = style.size;
  if (n <= 0) throw Error(ErrorCode::ShapeMismatch, "crop size must be positive");
  const CropWindow win = window ? *window : crop_window_for(footprint_box(cam, pose, params));
  const ImagePoint robot_px = cam.project(pose.position);
  const Eigen::Matrix2d jac_inv = cam.jacobian(pose.position).inverse();
  const double th = pose.heading.radians();
  const double c = std::cos(th), s = std::sin(th);
  const double inv_r = 1.0 / params.radius;
  const double level = std::clamp(style.noise_level, 0.0, 1.0);

  std::array<Blob, kClutterBlobs> blobs{};
  {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (auto& b : blobs) {
      b.u = unit(rng);
      b.v = unit(rng);
      b.radius = 0.05 + 0.2 * unit(rng);
      b.amplitude = (unit(rng) - 0.5) * 0.6 * level;
    }
  }

  Crop crop(n);
  const double step = win.side / n;
  const double origin_u = win.center.u - 0.5 * win.side;
  const double origin_v = win.center.v - 0.5 * win.side;
  for (int row = 0; row < n; ++row) {
    for (int col = 0; col < n; ++col) {
      double acc = 0.0;
      for (int sy = 0; sy < kSupersample; ++sy) {
        for (int sx = 0; sx < kSupersample; ++sx) {
          const double u = origin_u + (col + (sx + 0.5) / kSupersample) * step;
          const double v = origin_v + (row + (sy + 0.5) / kSupersample) * step;
          const Eigen::Vector2d g = jac_inv * Eigen::Vector2d(u - robot_px.u, v - robot_px.v);
          const double bx = (c * g.x() + s * g.y()) * inv_r;
          const double by = (-s * g.x() + c * g.y()) * inv_r;
          const double value = glyph(bx, by);
          if (value >= 0.0) {
            acc += value;
          } else {
            double bg = kBackground;
            const double cu = (col + 0.5) / n, cv = (row + 0.5) / n;
            for (const auto& b : blobs) {
              const double d2 = (cu - b.u) * (cu - b.u) + (cv - b.v) * (cv - b.v);
              bg += b.amplitude * std::exp(-d2 / (2.0 * b.radius * b.radius));
            }
            acc += bg;
          }
        }
      }
      crop.at(row, col) = acc / (kSupersample * kSupersample);
    }
  }

  std::normal_distribution<double> gauss(0.0, 1.0);
  // Quantized to 8 bits like a camera frame, so persisted crops round-trip.
  for (double& px : crop.pixels())
    px = std::round(std::clamp(px + kPixelNoise * level * gauss(rng), 0.0, 1.0) * 255.0) / 255.0;
  return crop;
}

}  // namespace deskservo::sim
