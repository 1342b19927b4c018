#include <algorithm>

#include "deskservo/sim.hpp"

namespace deskservo::sim {

Pose2D step_unicycle(const Pose2D& pose, double v, double omega, double dt,
                     const RobotParams& params) {
  if (!(dt > 0.0)) throw Error(ErrorCode::NonPositiveDt, "integration step must be positive");
  v = std::clamp(v, -params.max_linear, params.max_linear);
  omega = std::clamp(omega, -params.max_angular, params.max_angular);
  const double th = pose.heading.radians();
  Pose2D out = pose;
  if (std::abs(omega) < 1e-9) {
    out.position.x += v * dt * std::cos(th);
    out.position.y += v * dt * std::sin(th);
    out.heading = Angle(th + omega * dt);
    return out;
  }
  const double th1 = th + omega * dt;
  out.position.x += (v / omega) * (std::sin(th1) - std::sin(th));
  out.position.y -= (v / omega) * (std::cos(th1) - std::cos(th));
  out.heading = Angle(th1);
  return out;
}

Angle in_image_heading(const CameraModel& cam, const Pose2D& pose, double eps) {
  const double th = pose.heading.radians();
  const ImagePoint p0 = cam.project(pose.position);
  const ImagePoint p1 = cam.project(
      {pose.position.x + eps * std::cos(th), pose.position.y + eps * std::sin(th)});
  return Angle(std::atan2(p1.v - p0.v, p1.u - p0.u));
}

}  // namespace deskservo::sim
