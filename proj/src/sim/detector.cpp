#include <algorithm>
#include <limits>

#include "deskservo/sim.hpp"

namespace deskservo::sim {

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double ax0 = a.center.u - 0.5 * a.width, ax1 = a.center.u + 0.5 * a.width;
  const double ay0 = a.center.v - 0.5 * a.height, ay1 = a.center.v + 0.5 * a.height;
  const double bx0 = b.center.u - 0.5 * b.width, bx1 = b.center.u + 0.5 * b.width;
  const double by0 = b.center.v - 0.5 * b.height, by1 = b.center.v + 0.5 * b.height;
  const double iw = std::max(0.0, std::min(ax1, bx1) - std::max(ax0, bx0));
  const double ih = std::max(0.0, std::min(ay1, by1) - std::max(ay0, by0));
  const double inter = iw * ih;
  const double uni = a.width * a.height + b.width * b.height - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

BoundingBox footprint_box(const CameraModel& cam, const Pose2D& pose, const RobotParams& params) {
  double u0 = std::numeric_limits<double>::infinity(), v0 = u0;
  double u1 = -u0, v1 = -u0;
  const double th = pose.heading.radians();
  for (int k = 0; k < 8; ++k) {
    const double a = th + k * kPi / 4.0;
    const ImagePoint q = cam.project({pose.position.x + params.radius * std::cos(a),
                                      pose.position.y + params.radius * std::sin(a)});
    u0 = std::min(u0, q.u);
    u1 = std::max(u1, q.u);
    v0 = std::min(v0, q.v);
    v1 = std::max(v1, q.v);
  }
  return {{0.5 * (u0 + u1), 0.5 * (v0 + v1)}, u1 - u0, v1 - v0, 0.0};
}

std::optional<BoundingBox> observe_box(const CameraModel& cam, const Pose2D& pose,
                                       const RobotParams& params, const DetectorNoise& noise,
                                       Rng& rng) {
  BoundingBox box = footprint_box(cam, pose, params);
  const bool visible = cam.in_frame(cam.project(pose.position));

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double drop = unit(rng);
  const double du = gauss(rng), dv = gauss(rng), dw = gauss(rng), dh = gauss(rng);

  if (!visible || drop < noise.dropout) return std::nullopt;
  box.center.u += noise.center_sigma * du;
  box.center.v += noise.center_sigma * dv;
  box.width = std::max(1.0, box.width + noise.size_sigma * dw);
  box.height = std::max(1.0, box.height + noise.size_sigma * dh);
  return box;
}

}  // namespace deskservo::sim
