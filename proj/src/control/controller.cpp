#include <algorithm>
#include <string>
#include <vector>

#include "deskservo/control.hpp"

namespace deskservo::control {

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::Follow: return "FOLLOW";
    case Mode::Spin: return "SPIN";
    case Mode::Done: return "DONE";
  }
  return "FOLLOW";
}

ControllerState initial_state(const ImagePose& pose, const ImageTrack& track,
                              const ControllerGains& gains) {
  ControllerState s;
  const double e_h = ang_diff(track.segment_heading(0), pose.heading);
  s.mode = std::abs(e_h) > gains.spin_tolerance ? Mode::Spin : Mode::Follow;
  return s;
}

namespace {

bool reached_segment_end(const ImagePose& pose, const ImageTrack& track, std::size_t seg,
                         double radius) {
  const ImagePoint a = track.segment_start(seg);
  const ImagePoint b = track.segment_end(seg);
  if (norm(pose.position - b) < radius) return true;
  // Past the end along the segment direction.
  return dot(pose.position - a, b - a) >= dot(b - a, b - a);
}

}  // namespace

ControlOutput control_step(const ImagePose& pose, const ImageTrack& track,
                           const ControllerState& state, const ControllerGains& gains,
                           const sim::RobotParams& limits, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::NonPositiveDt, "controller tick must be positive");
  ControlOutput out;
  out.state = state;
  ControllerState& s = out.state;
  if (s.mode == Mode::Done) return out;
  if (s.segment >= track.segment_count())
    throw Error(ErrorCode::InvalidState, "segment index " + std::to_string(s.segment) +
                                             " outside a track of " +
                                             std::to_string(track.segment_count()) + " segments");

  if (s.mode == Mode::Follow &&
      reached_segment_end(pose, track, s.segment, gains.capture_radius)) {
    s.has_previous = false;
    if (s.segment + 1 == track.segment_count()) {
      s.mode = Mode::Done;
      return out;
    }
    ++s.segment;
    const double e_next = ang_diff(track.segment_heading(s.segment), pose.heading);
    s.mode = std::abs(e_next) > gains.spin_tolerance ? Mode::Spin : Mode::Follow;
  }

  const double e_h = ang_diff(track.segment_heading(s.segment), pose.heading);
  if (s.mode == Mode::Spin) {
    if (std::abs(e_h) > gains.spin_tolerance) {
      out.v = 0.0;
      out.omega = std::clamp(kImageToRobotTurn * gains.kp_h * e_h, -limits.max_angular,
                             limits.max_angular);
      return out;
    }
    s.mode = Mode::Follow;
    s.has_previous = false;
  }

  const double e_ct =
      cross_track(pose.position, track.segment_start(s.segment), track.segment_end(s.segment));
  const double de_ct = s.has_previous ? (e_ct - s.previous_ct) / dt : 0.0;
  const double de_h = s.has_previous ? ang_diff(e_h, s.previous_h) / dt : 0.0;
  s.previous_ct = e_ct;
  s.previous_h = e_h;
  s.has_previous = true;

  const double turn = gains.kp_ct * e_ct + gains.kd_ct * de_ct + gains.kp_h * e_h + gains.kd_h * de_h;
  out.omega = std::clamp(kImageToRobotTurn * turn, -limits.max_angular, limits.max_angular);
  out.v = std::clamp(gains.v_nom * std::max(0.0, std::cos(e_h)), 0.0, limits.max_linear);
  return out;
}

ImageTrack make_track_from_corners(std::span<const sim::BoundingBox> corners) {
  if (corners.size() < 2)
    throw Error(ErrorCode::TooFewCorners, "a track needs at least two corner boxes");
  std::vector<ImagePoint> pts;
  pts.reserve(corners.size());
  for (const auto& c : corners) pts.push_back(c.center);
  return ImageTrack(std::move(pts));
}

}  // namespace deskservo::control
