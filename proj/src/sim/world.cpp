#include "deskservo/sim.hpp"

namespace deskservo::sim {

namespace {

constexpr std::uint64_t kRenderStream = 0x9e3779b97f4a7c15ULL;

}  // namespace

World::World(const Scenario& scenario)
    : scenario_(scenario),
      camera_(scenario.camera()),
      detector_rng_(scenario.seed),
      render_rng_(scenario.seed ^ kRenderStream) {
  if (!(scenario.tick_rate > 0.0)) throw Error(ErrorCode::NonPositiveDt, "tick rate must be positive");
  truth_.append(0.0, pose_);
}

void World::reset(const Pose2D& pose, std::uint64_t seed) {
  pose_ = pose;
  tick_ = 0;
  time_ = 0.0;
  truth_.clear();
  truth_.append(0.0, pose_);
  detector_rng_.seed(seed);
  render_rng_.seed(seed ^ kRenderStream);
}

void World::step(double v, double omega) {
  pose_ = step_unicycle(pose_, v, omega, dt(), scenario_.robot);
  ++tick_;
  time_ = static_cast<double>(tick_) * dt();
  truth_.append(time_, pose_);
}

std::optional<BoundingBox> World::detect() { return detect(scenario_.noise); }

std::optional<BoundingBox> World::detect(const DetectorNoise& noise) {
  auto box = observe_box(camera_, pose_, scenario_.robot, noise, detector_rng_);
  if (box) box->timestamp = time_;
  return box;
}

Crop World::render(const BoundingBox& box) {
  return render(box, {scenario_.crop_size, scenario_.crop_noise});
}

Crop World::render(const BoundingBox& box, const CropStyle& style) {
  return render_crop(pose_, camera_, scenario_.robot, style, render_rng_, crop_window_for(box));
}

}  // namespace deskservo::sim
