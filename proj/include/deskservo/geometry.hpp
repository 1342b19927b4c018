#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "deskservo/error.hpp"

namespace deskservo {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// World ground-plane coordinates in meters.
struct GroundPoint {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const GroundPoint&) const = default;
};

/// Image coordinates in pixels: u to the right, v downward.
struct ImagePoint {
  double u = 0.0;
  double v = 0.0;
  bool operator==(const ImagePoint&) const = default;
};

inline ImagePoint operator+(ImagePoint a, ImagePoint b) { return {a.u + b.u, a.v + b.v}; }
inline ImagePoint operator-(ImagePoint a, ImagePoint b) { return {a.u - b.u, a.v - b.v}; }
inline ImagePoint operator*(double s, ImagePoint a) { return {s * a.u, s * a.v}; }
inline double dot(ImagePoint a, ImagePoint b) { return a.u * b.u + a.v * b.v; }
inline double norm(ImagePoint a) { return std::hypot(a.u, a.v); }

/// Angle canonicalized to [0, 2π).
class Angle {
 public:
  constexpr Angle() = default;
  explicit Angle(double radians) : rad_(canonical(radians)) {}

  double radians() const { return rad_; }
  double degrees() const { return rad_ * 180.0 / kPi; }

  static Angle from_degrees(double deg) { return Angle(deg * kPi / 180.0); }

  static double canonical(double radians) {
    double r = std::fmod(radians, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    // fmod of a tiny negative value can round up to exactly 2π.
    if (r >= kTwoPi) r = 0.0;
    return r;
  }

  bool operator==(const Angle&) const = default;

 private:
  double rad_ = 0.0;
};

/// Signed smallest rotation taking b onto a, in (−π, π].
double ang_diff(Angle a, Angle b);
double ang_diff(double a, double b);

/// Signed perpendicular distance from p to the infinite line through a→b.
/// Positive when p lies to the left of the direction as seen on screen
/// (u right, v down).
double cross_track(ImagePoint p, ImagePoint a, ImagePoint b);

/// Distance from p to the closed segment a-b.
double distance_to_segment(ImagePoint p, ImagePoint a, ImagePoint b);

/// Operator-drawn image-space polyline.
class ImageTrack {
 public:
  explicit ImageTrack(std::vector<ImagePoint> waypoints);

  const std::vector<ImagePoint>& waypoints() const { return waypoints_; }
  std::size_t segment_count() const { return waypoints_.size() - 1; }
  ImagePoint segment_start(std::size_t i) const { return waypoints_.at(i); }
  ImagePoint segment_end(std::size_t i) const { return waypoints_.at(i + 1); }
  /// Direction of segment i as an image-space angle (atan2(dv, du)).
  Angle segment_heading(std::size_t i) const;
  double segment_length(std::size_t i) const;

 private:
  std::vector<ImagePoint> waypoints_;
};

struct TrackProjection {
  std::size_t segment = 0;
  ImagePoint point;
  double arc_length = 0.0;  // from the first waypoint
  double distance = 0.0;
};

/// Closest point on the track; ties go to the lower segment index.
TrackProjection nearest_on_track(ImagePoint p, const ImageTrack& track);

/// Simple polygon drawn in image space.
class Geofence {
 public:
  explicit Geofence(std::vector<ImagePoint> vertices);

  const std::vector<ImagePoint>& vertices() const { return vertices_; }
  double area() const;

 private:
  std::vector<ImagePoint> vertices_;
};

/// Even-odd containment; points on an edge count as inside.
bool contains(const Geofence& fence, ImagePoint p);

/// Distance from p to the polygon boundary.
double distance_to_boundary(const Geofence& fence, ImagePoint p);

bool is_simple_polygon(std::span<const ImagePoint> vertices);
double signed_area(std::span<const ImagePoint> vertices);

/// Plane-to-plane homography from the ground plane to the image.
class CameraModel {
 public:
  CameraModel(const Eigen::Matrix3d& homography, int width, int height);

  /// Camera at (position.x, position.y, height) looking toward +y,
  /// tilted `tilt_rad` away from straight down. World +x maps to image
  /// right. Used as a scenario and test fixture; intrinsics are folded
  /// into the homography and not retained.
  static CameraModel tilted(double height, double tilt_rad, double focal_px, int width,
                            int height_px, GroundPoint position = {});

  ImagePoint project(GroundPoint p) const;
  GroundPoint unproject(ImagePoint p) const;
  /// ∂(u,v)/∂(x,y) at p.
  Eigen::Matrix2d jacobian(GroundPoint p) const;

  const Eigen::Matrix3d& homography() const { return h_; }
  int width() const { return width_; }
  int height() const { return height_; }
  bool in_frame(ImagePoint p) const {
    return p.u >= 0.0 && p.v >= 0.0 && p.u < width_ && p.v < height_;
  }

 private:
  Eigen::Matrix3d h_;
  Eigen::Matrix3d h_inv_;
  int width_;
  int height_;
};

}  // namespace deskservo
