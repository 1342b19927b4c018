#include <cmath>

#include "deskservo/data.hpp"

namespace deskservo::data {

Wanderer::Wanderer(sim::World& world, Geofence fence, WanderConfig config, std::uint64_t seed)
    : world_(world), fence_(std::move(fence)), config_(config), rng_(seed) {
  if (!(config_.spin_speed > 0.0) || !(config_.speed > 0.0))
    throw Error(ErrorCode::ConfigError, "wander speeds must be positive");
  if (!(config_.duration >= 0.0)) throw Error(ErrorCode::ConfigError, "negative wander duration");
  ticks_total_ = std::llround(config_.duration / world_.dt());
  if (!contains(fence_, world_.camera().project(world_.pose().position)))
    throw Error(ErrorCode::InvalidState, "robot must start inside the geofence");
}

void Wanderer::start_spin() {
  // Uniform new heading, reached by turning the short way round.
  std::uniform_real_distribution<double> heading(0.0, kTwoPi);
  const double turn = ang_diff(heading(rng_), 0.0);
  spin_ticks_left_ =
      std::max<std::int64_t>(1, std::llround(std::abs(turn) / config_.spin_speed / world_.dt()));
  v_cmd_ = 0.0;
  w_cmd_ = turn < 0.0 ? -config_.spin_speed : config_.spin_speed;
  compare_ready_ = false;
}

bool Wanderer::step() {
  if (ticks_done_ >= ticks_total_) return false;

  WanderFrame frame;
  frame.t = world_.time();
  frame.truth = world_.pose();
  frame.box = world_.detect();
  if (frame.box) frame.crop = world_.render(*frame.box);

  if (spin_ticks_left_ > 0) {
    // Open-loop timed spin in progress; detections are only logged.
  } else if (!frame.box) {
    lost_time_ += world_.dt();
    if (lost_time_ > config_.lost_timeout)
      throw Error(ErrorCode::RobotLostTimeout, "no detection for more than the lost timeout");
    if (lost_time_ > config_.lost_stop) {
      v_cmd_ = 0.0;
      w_cmd_ = 0.0;
    }
  } else {
    lost_time_ = 0.0;
    const ImagePoint c = frame.box->center;
    // Signed clearance: positive inside the fence.
    const double d = contains(fence_, c) ? distance_to_boundary(fence_, c)
                                         : -distance_to_boundary(fence_, c);
    if (d >= config_.boundary_margin) {
      at_boundary_ = false;
      v_cmd_ = config_.speed;
      w_cmd_ = 0.0;
    } else {
      // Spin on reaching the boundary band, and again whenever the last
      // straight tick did not move the robot away from the boundary.
      if (!at_boundary_ || (compare_ready_ && d <= last_clearance_)) {
        start_spin();
      } else {
        compare_ready_ = true;
        v_cmd_ = config_.speed;
        w_cmd_ = 0.0;
      }
      at_boundary_ = true;
      last_clearance_ = d;
    }
  }

  frame.spinning = spin_ticks_left_ > 0;
  frames_.push_back(std::move(frame));
  world_.step(v_cmd_, w_cmd_);
  if (spin_ticks_left_ > 0 && --spin_ticks_left_ == 0) {
    v_cmd_ = config_.speed;
    w_cmd_ = 0.0;
  }
  ++ticks_done_;
  return true;
}

std::vector<WanderFrame> run_geofenced_wander(sim::World& world, const Geofence& fence,
                                              const WanderConfig& config, std::uint64_t seed) {
  Wanderer wanderer(world, fence, config, seed);
  while (wanderer.step()) {
  }
  return wanderer.take_frames();
}

}  // namespace deskservo::data
