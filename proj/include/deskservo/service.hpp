#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "deskservo/control.hpp"
#include "deskservo/data.hpp"
#include "deskservo/estimator.hpp"
#include "deskservo/sim.hpp"

namespace deskservo::service {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration: one flat JSON object; unknown keys are rejected.

struct Config {
  sim::Scenario scenario;
  data::SpinConfig spin;
  data::WanderConfig wander;
  data::LabelConfig label;
  double test_duration = 60.0;  // s at the end of the recording
  double scarce_fraction = 0.1;
  estimator::TrainConfig train;
  control::ControllerGains gains;
  int runs = 8;
  double run_timeout = 120.0;   // s of simulated time per run
  double coast_time = 0.5;      // s a command is held through missed detections
  double start_offset_m = 0.02;
  double start_offset_deg = 5.0;
  std::optional<std::vector<ImagePoint>> track;
  std::optional<std::vector<ImagePoint>> fence;
  int port = 8080;
  double real_time_factor = 1.0;  // serve: simulated seconds per wall second

  ImageTrack image_track() const;
  Geofence geofence() const;
};

Config config_from_json(const json& j);
json config_to_json(const Config& config);
Config load_config(const std::string& path);

// ---------------------------------------------------------------------------
// Pipeline: frame source → detector → estimator → controller → robot

/// Heading stage of the pipeline.
class HeadingEstimator {
 public:
  virtual ~HeadingEstimator() = default;
  virtual Angle estimate(const sim::Crop& crop, const sim::World& world) const = 0;
};

class LearnedEstimator final : public HeadingEstimator {
 public:
  explicit LearnedEstimator(estimator::Model model) : model_(std::move(model)) {}
  Angle estimate(const sim::Crop& crop, const sim::World& world) const override;

 private:
  estimator::Model model_;
};

/// Bypass used to validate the controller: in-image heading of the true pose.
class GroundTruthEstimator final : public HeadingEstimator {
 public:
  Angle estimate(const sim::Crop& crop, const sim::World& world) const override;
};

/// Holds the last command through short detection gaps, then stops.
class MissedDetectionPolicy {
 public:
  explicit MissedDetectionPolicy(double coast_time) : coast_time_(coast_time) {}

  void on_detection(double v, double omega);
  /// Returns the command to apply for a tick without a detection, or
  /// nothing when the coast window has been exhausted (robot stopped).
  std::optional<std::pair<double, double>> on_miss(double dt);
  double missing_time() const { return missing_; }

 private:
  double coast_time_;
  double missing_ = 0.0;
  double last_v_ = 0.0;
  double last_omega_ = 0.0;
};

struct PipelineTick {
  double t = 0.0;
  std::uint64_t frame = 0;
  std::optional<sim::BoundingBox> box;
  std::optional<sim::Crop> crop;
  std::optional<control::ImagePose> estimate;
  bool command_present = false;
  double v = 0.0;
  double omega = 0.0;
  control::Mode mode = control::Mode::Follow;
  std::size_t segment = 0;
  double image_cross_track = 0.0;  // px to the active segment, telemetry only
  sim::Pose2D truth;                // evaluation only
};

struct RunMetrics {
  double max_ct = 0.0;   // m
  double mean_ct = 0.0;  // m
  double rms_ct = 0.0;   // m
  std::vector<double> ct_series;
  double median_heading_error_deg = 0.0;  // NaN without estimates
};

struct RunRecord {
  int run_index = 0;
  std::uint64_t seed = 0;
  bool ground_truth_pose = false;
  bool completed = false;  // reached DONE before the timeout
  json config;
  std::vector<PipelineTick> ticks;
  RunMetrics metrics;
};

json tick_to_json(const PipelineTick& tick);
PipelineTick tick_from_json(const json& j);
json metrics_to_json(const RunMetrics& m);
RunMetrics metrics_from_json(const json& j);
json record_to_json(const RunRecord& record);
RunRecord record_from_json(const json& j);

/// One header line, one line per tick, one metrics line.
void write_run_record(std::ostream& out, const RunRecord& record);
RunRecord read_run_record(std::istream& in);

/// Ground-plane polyline under the image track (evaluation only).
std::vector<GroundPoint> ground_polyline(const CameraModel& cam, const ImageTrack& track);
double distance_to_polyline(GroundPoint p, std::span<const GroundPoint> polyline);

RunMetrics compute_run_metrics(const RunRecord& record, std::span<const GroundPoint> polyline,
                               const CameraModel& cam);

/// One closed-loop run, advanced one tick per step().
class AutonomyRun {
 public:
  AutonomyRun(const Config& config, ImageTrack track,
              std::shared_ptr<const HeadingEstimator> estimator, int run_index);

  /// Returns false once the run is finished (DONE or timeout).
  bool step();
  bool finished() const { return finished_; }
  const sim::World& world() const { return world_; }
  const ImageTrack& track() const { return track_; }
  const RunRecord& record() const { return record_; }
  /// Finalizes metrics and hands over the record.
  RunRecord take_record();

 private:
  Config config_;
  ImageTrack track_;
  std::shared_ptr<const HeadingEstimator> estimator_;
  sim::World world_;
  control::ControllerState state_;
  bool state_initialized_ = false;
  MissedDetectionPolicy coast_;
  RunRecord record_;
  std::uint64_t frame_ = 0;
  bool finished_ = false;
};

std::uint64_t run_seed(const Config& config, int run_index);

/// Runs `n_runs` seeded runs; a null estimator selects the ground-truth bypass.
std::vector<RunRecord> run_autonomy(const Config& config, const ImageTrack& track,
                                    std::shared_ptr<const HeadingEstimator> estimator, int n_runs);

// ---------------------------------------------------------------------------
// Camera frame for the operator console.

struct FrameOverlay {
  std::optional<ImageTrack> track;
  std::optional<Geofence> fence;
  std::optional<sim::BoundingBox> box;
};

/// Rendered scene as 8-bit RGB, row-major.
std::vector<std::uint8_t> render_frame_rgb(const sim::World& world, const FrameOverlay& overlay);
std::vector<std::uint8_t> encode_png(std::span<const std::uint8_t> rgb, int width, int height);

}  // namespace deskservo::service
