#include <cmath>
#include <random>

#include "deskservo/service.hpp"

namespace deskservo::service {

Angle LearnedEstimator::estimate(const sim::Crop& crop, const sim::World&) const {
  return estimator::predict(model_, crop);
}

Angle GroundTruthEstimator::estimate(const sim::Crop&, const sim::World& world) const {
  return sim::in_image_heading(world.camera(), world.pose());
}

void MissedDetectionPolicy::on_detection(double v, double omega) {
  missing_ = 0.0;
  last_v_ = v;
  last_omega_ = omega;
}

std::optional<std::pair<double, double>> MissedDetectionPolicy::on_miss(double dt) {
  missing_ += dt;
  if (missing_ <= coast_time_ + 1e-9) return std::pair{last_v_, last_omega_};
  return std::nullopt;
}

std::uint64_t run_seed(const Config& config, int run_index) {
  // splitmix64 of (seed, run) so neighbouring runs get unrelated streams.
  std::uint64_t z = config.scenario.seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(run_index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

sim::Pose2D start_pose(const Config& config, const CameraModel& cam, const ImageTrack& track,
                       std::uint64_t seed) {
  const GroundPoint a = cam.unproject(track.segment_start(0));
  const GroundPoint b = cam.unproject(track.segment_end(0));
  sim::Rng rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double dx = config.start_offset_m * unit(rng);
  const double dy = config.start_offset_m * unit(rng);
  const double dh = config.start_offset_deg * kPi / 180.0 * unit(rng);
  return {{a.x + dx, a.y + dy}, Angle(std::atan2(b.y - a.y, b.x - a.x) + dh)};
}

}  // namespace

AutonomyRun::AutonomyRun(const Config& config, ImageTrack track,
                         std::shared_ptr<const HeadingEstimator> estimator, int run_index)
    : config_(config),
      track_(std::move(track)),
      estimator_(std::move(estimator)),
      world_(config.scenario),
      coast_(config.coast_time) {
  record_.run_index = run_index;
  record_.seed = run_seed(config, run_index);
  record_.ground_truth_pose = estimator_ == nullptr;
  record_.config = config_to_json(config);
  world_.reset(start_pose(config, world_.camera(), track_, record_.seed), record_.seed);
}

bool AutonomyRun::step() {
  if (finished_) return false;
  PipelineTick tick;
  tick.t = world_.time();
  tick.frame = frame_++;
  tick.truth = world_.pose();

  std::optional<control::ImagePose> pose;
  if (!estimator_) {
    pose = control::ImagePose{world_.camera().project(world_.pose().position),
                              sim::in_image_heading(world_.camera(), world_.pose())};
  } else if ((tick.box = world_.detect())) {
    tick.crop = world_.render(*tick.box);
    pose = control::ImagePose{tick.box->center, estimator_->estimate(*tick.crop, world_)};
  }
  tick.estimate = pose;

  if (pose) {
    if (!state_initialized_) {
      state_ = control::initial_state(*pose, track_, config_.gains);
      state_initialized_ = true;
    }
    const auto out = control::control_step(*pose, track_, state_, config_.gains,
                                           config_.scenario.robot, world_.dt());
    state_ = out.state;
    if (state_.mode != control::Mode::Done) {
      tick.command_present = true;
      tick.v = out.v;
      tick.omega = out.omega;
      coast_.on_detection(out.v, out.omega);
    }
    tick.image_cross_track = cross_track(pose->position, track_.segment_start(state_.segment),
                                         track_.segment_end(state_.segment));
  } else if (state_initialized_ && state_.mode != control::Mode::Done) {
    if (const auto cmd = coast_.on_miss(world_.dt())) {
      tick.command_present = true;
      tick.v = cmd->first;
      tick.omega = cmd->second;
    }
  }
  tick.mode = state_.mode;
  tick.segment = state_.segment;
  record_.ticks.push_back(std::move(tick));
  const PipelineTick& last = record_.ticks.back();

  if (last.mode == control::Mode::Done) {
    record_.completed = true;
    finished_ = true;
    return false;
  }
  if (world_.time() + 0.5 * world_.dt() >= config_.run_timeout) {
    finished_ = true;
    return false;
  }
  world_.step(last.v, last.omega);
  return true;
}

RunRecord AutonomyRun::take_record() {
  const auto polyline = ground_polyline(world_.camera(), track_);
  record_.metrics = compute_run_metrics(record_, polyline, world_.camera());
  return std::move(record_);
}

std::vector<RunRecord> run_autonomy(const Config& config, const ImageTrack& track,
                                    std::shared_ptr<const HeadingEstimator> estimator, int n_runs) {
  std::vector<RunRecord> records;
  records.reserve(static_cast<std::size_t>(std::max(n_runs, 0)));
  for (int i = 0; i < n_runs; ++i) {
    AutonomyRun run(config, track, estimator, i);
    while (run.step()) {
    }
    records.push_back(run.take_record());
  }
  return records;
}

}  // namespace deskservo::service
