#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "deskservo/geometry.hpp"
#include "deskservo/sim.hpp"

namespace deskservo::data {

using sim::BoundingBox;
using sim::Crop;
using sim::Rng;

// ---------------------------------------------------------------------------
// Spin-on-the-spot collection

struct SpinFrame {
  double t = 0.0;
  /// Operator annotation; present on the first and last frame only.
  std::optional<BoundingBox> annotation;
  /// Noiseless footprint box for evaluation, never used for labeling.
  BoundingBox truth;
};

struct SpinSession {
  int location = 0;
  std::vector<SpinFrame> frames;
  int revolutions = 3;
  /// Integrated rotation actually executed, radians.
  double executed_rotation = 0.0;

  double elapsed() const { return frames.empty() ? 0.0 : frames.back().t - frames.front().t; }
};

struct SpinConfig {
  int revolutions = 3;
  /// Commanded rate; saturates at the robot limit like a joystick held over.
  double command_omega = 2.0;
  double approach_speed = 0.3;
};

/// Supplies the operator's box for the first/last frame of a session.
/// The default emulates a perfect click with the ground-truth box.
using Annotator = std::function<BoundingBox(int location, bool first, const BoundingBox& truth)>;

std::vector<SpinSession> run_spin_collection(sim::World& world,
                                             std::span<const ImagePoint> locations,
                                             const SpinConfig& config = {},
                                             const Annotator& annotate = {});

/// Five default spin locations spread over the frame.
std::vector<ImagePoint> default_spin_locations(const CameraModel& cam);

/// Linear interpolation of center and size between the endpoint annotations.
std::vector<BoundingBox> interpolate_boxes(const SpinSession& session);

/// Mean over sessions of (revolutions · 2π) / elapsed time, rad/s.
double calibrate_rotation(std::span<const SpinSession> sessions);

// ---------------------------------------------------------------------------
// Geofenced wandering

struct WanderConfig {
  double duration = 600.0;     // s
  double speed = 0.4;          // m/s
  double spin_speed = 1.2;     // rad/s, from calibrate_rotation
  double lost_stop = 0.5;      // s without detection before stopping
  double lost_timeout = 5.0;   // s without detection before giving up
  /// The exit test uses the fence inset by this many pixels, so spins
  /// happen before the box center crosses the drawn boundary.
  double boundary_margin = 20.0;
};

struct WanderFrame {
  double t = 0.0;
  std::optional<BoundingBox> box;
  std::optional<Crop> crop;
  /// Commanded spin active during the tick that starts at this frame.
  bool spinning = false;
  /// Evaluation only.
  sim::Pose2D truth;
};

/// Drive-straight / spin-at-boundary behavior, one tick per step().
class Wanderer {
 public:
  Wanderer(sim::World& world, Geofence fence, WanderConfig config, std::uint64_t seed);

  /// Observes, logs one frame, commands the robot. Returns false once the
  /// configured duration has elapsed (no frame is produced then).
  bool step();

  const std::vector<WanderFrame>& frames() const { return frames_; }
  std::vector<WanderFrame> take_frames() { return std::move(frames_); }
  const Geofence& fence() const { return fence_; }

 private:
  void start_spin();

  sim::World& world_;
  Geofence fence_;
  WanderConfig config_;
  Rng rng_;
  std::int64_t ticks_total_;
  std::int64_t ticks_done_ = 0;
  std::int64_t spin_ticks_left_ = 0;
  double lost_time_ = 0.0;
  bool at_boundary_ = false;
  bool compare_ready_ = false;
  double last_clearance_ = 0.0;
  double v_cmd_ = 0.0;
  double w_cmd_ = 0.0;
  std::vector<WanderFrame> frames_;
};

std::vector<WanderFrame> run_geofenced_wander(sim::World& world, const Geofence& fence,
                                              const WanderConfig& config, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Box-to-box orientation labels

struct OrientationLabel {
  double t = 0.0;
  Crop crop;
  Angle phi;
  double displacement = 0.0;  // px
  bool operator==(const OrientationLabel&) const = default;
};

struct LabelConfig {
  double dt = 0.25;   // s between the paired frames
  double tau = 5.0;   // px minimum displacement
};

std::vector<OrientationLabel> label_orientations(std::span<const WanderFrame> log,
                                                 const LabelConfig& config = {});

// ---------------------------------------------------------------------------
// Augmentation

struct AugmentationParams {
  double brightness_delta = 0.1;     // uniform in ±delta
  double contrast_min = 0.8;
  double contrast_max = 1.2;
  double blur_sigma_min = 0.3;       // px
  double blur_sigma_max = 1.0;
  double noise_sigma = 0.02;
  double p_brightness = 0.5;
  double p_contrast = 0.5;
  double p_blur = 0.3;
  double p_noise = 0.5;

  static AugmentationParams none();
};

void adjust_brightness(Crop& crop, double delta);
/// Scales about 0.5.
void adjust_contrast(Crop& crop, double factor);
/// Separable Gaussian with half-sample symmetric (reflective) padding.
void gaussian_blur(Crop& crop, double sigma);

/// Draws the same number of variates regardless of which steps fire.
Crop augment(const Crop& crop, const AugmentationParams& params, Rng& rng);

// ---------------------------------------------------------------------------
// Dataset and splits

enum class Split { Train, Val, Test };

struct Dataset {
  std::vector<OrientationLabel> entries;
  std::vector<Split> marks;

  std::vector<const OrientationLabel*> select(Split which) const;
  std::size_t count(Split which) const;
};

/// Test = entries inside the final `test_duration` seconds; val = last
/// 10% (by count, rounded down) of the remainder; train = the rest.
Dataset split(std::vector<OrientationLabel> entries, double test_duration);

/// Keeps the test split and the chronologically first `fraction` of the
/// train+val entries, re-splitting val as the last 10% of that subset.
Dataset restrict_training(const Dataset& full, double fraction);

// ---------------------------------------------------------------------------
// Persistence (line-delimited JSON, crops as base64 of 8-bit pixels)

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);
std::string encode_crop(const Crop& crop);
Crop decode_crop(std::string_view text, int size);

void write_labels(std::ostream& out, std::span<const OrientationLabel> labels);
std::vector<OrientationLabel> read_labels(std::istream& in);
void write_dataset(std::ostream& out, const Dataset& dataset);
Dataset read_dataset(std::istream& in);
void write_wander_log(std::ostream& out, std::span<const WanderFrame> frames);
std::vector<WanderFrame> read_wander_log(std::istream& in);

}  // namespace deskservo::data
