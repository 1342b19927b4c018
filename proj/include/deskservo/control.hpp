#pragma once

#include <cstddef>
#include <span>
#include <string_view>

#include "deskservo/geometry.hpp"
#include "deskservo/sim.hpp"

namespace deskservo::control {

/// Robot pose as seen in the image: box center and in-image heading.
struct ImagePose {
  ImagePoint position;
  Angle heading;
};

struct ControllerGains {
  double kp_ct = 0.01;          // rad/s per px
  double kd_ct = 0.02;          // rad/s per px/s
  double kp_h = 1.5;            // rad/s per rad
  double kd_h = 0.1;            // rad/s per rad/s
  double v_nom = 0.2;           // m/s
  double capture_radius = 15.0; // px
  double spin_tolerance = 0.15; // rad
};

enum class Mode { Follow, Spin, Done };

std::string_view to_string(Mode mode);

struct ControllerState {
  std::size_t segment = 0;
  Mode mode = Mode::Follow;
  bool has_previous = false;
  double previous_ct = 0.0;
  double previous_h = 0.0;
};

struct ControlOutput {
  double v = 0.0;
  double omega = 0.0;
  ControllerState state;
};

/// Image angles grow clockwise on screen (v down) while the robot's ω is
/// counter-clockwise seen from above, so for a camera looking down at the
/// floor a positive image-space correction maps to a negative ω.
inline constexpr double kImageToRobotTurn = -1.0;

/// Initial state for a pose at the start of the track: SPIN when the
/// heading is off the first segment by more than the tolerance.
ControllerState initial_state(const ImagePose& pose, const ImageTrack& track,
                              const ControllerGains& gains);

/// One PD tick of the segment follower with spin-on-the-spot at corners.
ControlOutput control_step(const ImagePose& pose, const ImageTrack& track,
                           const ControllerState& state, const ControllerGains& gains,
                           const sim::RobotParams& limits, double dt);

/// Track through the box centers, in order.
ImageTrack make_track_from_corners(std::span<const sim::BoundingBox> corners);

}  // namespace deskservo::control
