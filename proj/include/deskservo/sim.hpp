#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "deskservo/geometry.hpp"

namespace deskservo::sim {

using Rng = std::mt19937_64;

/// True ground-plane state of the robot; heading is CCW from world +x.
struct Pose2D {
  GroundPoint position;
  Angle heading;
  bool operator==(const Pose2D&) const = default;
};

struct RobotParams {
  double radius = 0.18;       // m
  double max_linear = 0.7;    // m/s
  double max_angular = 1.2;   // rad/s
};

struct BoundingBox {
  ImagePoint center;
  double width = 0.0;
  double height = 0.0;
  double timestamp = 0.0;
  bool operator==(const BoundingBox&) const = default;
};

double iou(const BoundingBox& a, const BoundingBox& b);

struct DetectorNoise {
  double center_sigma = 2.0;  // px
  double size_sigma = 1.0;    // px
  double dropout = 0.02;
};

/// P×P grayscale patch, row-major, values in [0, 1].
class Crop {
 public:
  Crop() = default;
  explicit Crop(int size, double fill = 0.0)
      : size_(size), pixels_(static_cast<std::size_t>(size) * size, fill) {}
  Crop(int size, std::vector<double> pixels);

  int size() const { return size_; }
  double at(int row, int col) const { return pixels_[static_cast<std::size_t>(row) * size_ + col]; }
  double& at(int row, int col) { return pixels_[static_cast<std::size_t>(row) * size_ + col]; }
  std::span<const double> pixels() const { return pixels_; }
  std::span<double> pixels() { return pixels_; }
  bool operator==(const Crop&) const = default;

 private:
  int size_ = 0;
  std::vector<double> pixels_;
};

/// Exact arc integration of the unicycle; commands are clamped first.
Pose2D step_unicycle(const Pose2D& pose, double v, double omega, double dt,
                     const RobotParams& params);

/// Axis-aligned box around 8 projected footprint points, no noise.
BoundingBox footprint_box(const CameraModel& cam, const Pose2D& pose, const RobotParams& params);

/// Simulated detector. Consumes the same number of draws from `rng` on
/// every call, so dropouts do not shift later noise. Returns nothing on
/// dropout or when the robot center projects outside the frame.
std::optional<BoundingBox> observe_box(const CameraModel& cam, const Pose2D& pose,
                                       const RobotParams& params, const DetectorNoise& noise,
                                       Rng& rng);

/// Image-space direction of an infinitesimal forward step.
Angle in_image_heading(const CameraModel& cam, const Pose2D& pose, double eps = 1e-4);

/// Square image region a crop samples.
struct CropWindow {
  ImagePoint center;
  double side = 0.0;
};

CropWindow crop_window_for(const BoundingBox& box);

struct CropStyle {
  int size = 32;
  double noise_level = 0.5;
};

/// Renders the robot glyph (wedge body with a dark nose notch) as seen
/// through the local homography Jacobian at the robot's position.
/// Without a window the noiseless footprint box is used.
Crop render_crop(const Pose2D& pose, const CameraModel& cam, const RobotParams& params,
                 const CropStyle& style, Rng& rng, std::optional<CropWindow> window = {});

/// Stand-in for the external position tracker: evaluation only.
class GroundTruthLog {
 public:
  struct Sample {
    double t;
    Pose2D pose;
  };

  void append(double t, const Pose2D& pose);
  /// Linear position, shortest-arc heading interpolation.
  Pose2D at(double t) const;

  const std::vector<Sample>& samples() const { return samples_; }
  bool empty() const { return samples_.empty(); }
  void clear() { samples_.clear(); }

 private:
  std::vector<Sample> samples_;
};

struct Scenario {
  double camera_height = 2.3;
  double camera_tilt_deg = 35.0;
  double focal_px = 1100.0;
  int image_width = 1280;
  int image_height = 720;
  RobotParams robot;
  DetectorNoise noise;
  std::uint64_t seed = 7;
  double tick_rate = 20.0;
  int crop_size = 32;
  double crop_noise = 0.5;

  double dt() const { return 1.0 / tick_rate; }
  CameraModel camera() const;
};

/// Ground-plane rectangle used for the default geofence, in meters.
struct GroundRect {
  double x_min, x_max, y_min, y_max;
};

inline constexpr GroundRect kDefaultFenceRect{-1.1, 1.1, 0.95, 2.7};
inline constexpr GroundRect kDefaultTrackRect{-0.5, 0.5, 1.2, 2.0};

std::vector<ImagePoint> project_rect(const CameraModel& cam, const GroundRect& rect);
/// Open rectangular track through the four projected corners (3 segments).
std::vector<ImagePoint> default_track_waypoints(const CameraModel& cam);
std::vector<ImagePoint> default_fence_vertices(const CameraModel& cam);

/// Single-owner mutable world advanced one tick at a time.
class World {
 public:
  World(const Scenario& scenario);

  const CameraModel& camera() const { return camera_; }
  const Scenario& scenario() const { return scenario_; }
  const RobotParams& robot() const { return scenario_.robot; }
  double dt() const { return scenario_.dt(); }
  double time() const { return time_; }
  const Pose2D& pose() const { return pose_; }
  const GroundTruthLog& ground_truth() const { return truth_; }

  /// Places the robot, resets time, the log and both noise streams.
  void reset(const Pose2D& pose, std::uint64_t seed);
  void step(double v, double omega);

  std::optional<BoundingBox> detect();
  std::optional<BoundingBox> detect(const DetectorNoise& noise);
  Crop render(const BoundingBox& box);
  Crop render(const BoundingBox& box, const CropStyle& style);

 private:
  Scenario scenario_;
  CameraModel camera_;
  Pose2D pose_;
  double time_ = 0.0;
  std::uint64_t tick_ = 0;
  GroundTruthLog truth_;
  Rng detector_rng_;
  Rng render_rng_;
};

}  // namespace deskservo::sim
