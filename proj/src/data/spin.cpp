#include <algorithm>
#include <string>

#include "deskservo/data.hpp"

namespace deskservo::data {

namespace {

// Scripted stand-in for the operator driving the robot by hand.
void drive_to(sim::World& world, GroundPoint goal, double speed) {
  const double dt = world.dt();
  const int max_ticks = static_cast<int>(120.0 / dt);
  for (int i = 0; i < max_ticks; ++i) {
    const auto& pose = world.pose();
    const double dx = goal.x - pose.position.x;
    const double dy = goal.y - pose.position.y;
    const double dist = std::hypot(dx, dy);
    if (dist < 0.005) return;
    const double err = ang_diff(std::atan2(dy, dx), pose.heading.radians());
    const double omega = std::clamp(err / dt, -world.robot().max_angular,
                                    world.robot().max_angular);
    const double v = std::abs(err) > 0.05 ? 0.0 : std::min(speed, dist / dt);
    world.step(v, omega);
  }
  throw Error(ErrorCode::UnreachableLocation, "scripted drive did not reach the spin location");
}

}  // namespace

std::vector<ImagePoint> default_spin_locations(const CameraModel& cam) {
  return {cam.project({0.0, 1.6}), cam.project({-0.5, 1.2}), cam.project({0.5, 1.2}),
          cam.project({0.5, 2.0}), cam.project({-0.5, 2.0})};
}

std::vector<SpinSession> run_spin_collection(sim::World& world,
                                             std::span<const ImagePoint> locations,
                                             const SpinConfig& config, const Annotator& annotate) {
  const auto& cam = world.camera();
  std::vector<SpinSession> sessions;
  for (std::size_t i = 0; i < locations.size(); ++i) {
    const ImagePoint target = locations[i];
    if (!cam.in_frame(target))
      throw Error(ErrorCode::UnreachableLocation, "spin location " + std::to_string(i) +
                                                      " lies outside the frame");
    GroundPoint goal;
    try {
      goal = cam.unproject(target);
    } catch (const Error& e) {
      throw Error(ErrorCode::UnreachableLocation, e.what());
    }
    drive_to(world, goal, config.approach_speed);

    SpinSession session;
    session.location = static_cast<int>(i);
    session.revolutions = config.revolutions;
    auto record = [&] {
      SpinFrame f;
      f.t = world.time();
      f.truth = sim::footprint_box(cam, world.pose(), world.robot());
      f.truth.timestamp = f.t;
      session.frames.push_back(f);
    };
    record();
    const double target_rotation = config.revolutions * kTwoPi;
    const double rate = std::min(std::abs(config.command_omega), world.robot().max_angular);
    while (session.executed_rotation < target_rotation) {
      world.step(0.0, config.command_omega);
      session.executed_rotation += rate * world.dt();
      record();
    }

    for (bool first : {true, false}) {
      SpinFrame& f = first ? session.frames.front() : session.frames.back();
      BoundingBox box = annotate ? annotate(session.location, first, f.truth) : f.truth;
      box.timestamp = f.t;
      f.annotation = box;
    }
    sessions.push_back(std::move(session));
  }
  return sessions;
}

std::vector<BoundingBox> interpolate_boxes(const SpinSession& session) {
  if (session.frames.size() < 2 || !session.frames.front().annotation ||
      !session.frames.back().annotation)
    throw Error(ErrorCode::MissingEndpointAnnotation,
                "session " + std::to_string(session.location) + " lacks endpoint annotations");
  const BoundingBox& a = *session.frames.front().annotation;
  const BoundingBox& b = *session.frames.back().annotation;
  const double t0 = session.frames.front().t;
  const double span = session.frames.back().t - t0;
  std::vector<BoundingBox> out;
  out.reserve(session.frames.size());
  for (const auto& f : session.frames) {
    const double w = span > 0.0 ? (f.t - t0) / span : 0.0;
    BoundingBox box;
    box.center = {a.center.u + w * (b.center.u - a.center.u), a.center.v + w * (b.center.v - a.center.v)};
    box.width = a.width + w * (b.width - a.width);
    box.height = a.height + w * (b.height - a.height);
    box.timestamp = f.t;
    out.push_back(box);
  }
  return out;
}

double calibrate_rotation(std::span<const SpinSession> sessions) {
  if (sessions.empty()) throw Error(ErrorCode::EmptyInput, "no spin sessions to calibrate from");
  double acc = 0.0;
  for (const auto& s : sessions) {
    const double elapsed = s.elapsed();
    if (!(elapsed > 0.0)) throw Error(ErrorCode::EmptyInput, "spin session has zero duration");
    acc += s.revolutions * kTwoPi / elapsed;
  }
  return acc / static_cast<double>(sessions.size());
}

}  // namespace deskservo::data
