#include <fstream>
#include <set>
#include <string>

#include "deskservo/service.hpp"

namespace deskservo::service {
namespace {

template <class C, class F>
void visit_fields(C& c, F&& f) {
  f("camera_height", c.scenario.camera_height);
  f("camera_tilt_deg", c.scenario.camera_tilt_deg);
  f("focal_px", c.scenario.focal_px);
  f("image_width", c.scenario.image_width);
  f("image_height", c.scenario.image_height);
  f("robot_radius", c.scenario.robot.radius);
  f("max_linear", c.scenario.robot.max_linear);
  f("max_angular", c.scenario.robot.max_angular);
  f("detector_center_sigma", c.scenario.noise.center_sigma);
  f("detector_size_sigma", c.scenario.noise.size_sigma);
  f("detector_dropout", c.scenario.noise.dropout);
  f("seed", c.scenario.seed);
  f("tick_rate", c.scenario.tick_rate);
  f("crop_size", c.scenario.crop_size);
  f("crop_noise", c.scenario.crop_noise);

  f("spin_revolutions", c.spin.revolutions);
  f("spin_command_omega", c.spin.command_omega);
  f("spin_approach_speed", c.spin.approach_speed);

  f("wander_duration", c.wander.duration);
  f("wander_speed", c.wander.speed);
  f("wander_spin_speed", c.wander.spin_speed);
  f("wander_lost_stop", c.wander.lost_stop);
  f("wander_lost_timeout", c.wander.lost_timeout);
  f("wander_boundary_margin", c.wander.boundary_margin);

  f("label_dt", c.label.dt);
  f("label_tau", c.label.tau);
  f("test_duration", c.test_duration);
  f("scarce_fraction", c.scarce_fraction);

  f("hidden", c.train.shape.hidden);
  f("pool", c.train.shape.pool);
  f("bins", c.train.shape.bins);
  f("alpha", c.train.alpha);
  f("learning_rate", c.train.learning_rate);
  f("momentum", c.train.momentum);
  f("batch_size", c.train.batch_size);
  f("epochs", c.train.epochs);
  f("train_seed", c.train.seed);
  f("aug_brightness_delta", c.train.augmentation.brightness_delta);
  f("aug_contrast_min", c.train.augmentation.contrast_min);
  f("aug_contrast_max", c.train.augmentation.contrast_max);
  f("aug_blur_sigma_min", c.train.augmentation.blur_sigma_min);
  f("aug_blur_sigma_max", c.train.augmentation.blur_sigma_max);
  f("aug_noise_sigma", c.train.augmentation.noise_sigma);
  f("aug_p_brightness", c.train.augmentation.p_brightness);
  f("aug_p_contrast", c.train.augmentation.p_contrast);
  f("aug_p_blur", c.train.augmentation.p_blur);
  f("aug_p_noise", c.train.augmentation.p_noise);

  f("kp_ct", c.gains.kp_ct);
  f("kd_ct", c.gains.kd_ct);
  f("kp_h", c.gains.kp_h);
  f("kd_h", c.gains.kd_h);
  f("v_nom", c.gains.v_nom);
  f("capture_radius", c.gains.capture_radius);
  f("spin_tolerance", c.gains.spin_tolerance);

  f("runs", c.runs);
  f("run_timeout", c.run_timeout);
  f("coast_time", c.coast_time);
  f("start_offset_m", c.start_offset_m);
  f("start_offset_deg", c.start_offset_deg);
  f("port", c.port);
  f("real_time_factor", c.real_time_factor);
}

json points_to_json(const std::vector<ImagePoint>& pts) {
  json out = json::array();
  for (const auto& p : pts) out.push_back({p.u, p.v});
  return out;
}

std::vector<ImagePoint> points_from_json(const json& j, const char* key) {
  if (!j.is_array()) throw Error(ErrorCode::ConfigError, std::string(key) + ": expected an array");
  std::vector<ImagePoint> pts;
  for (const auto& p : j) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
      throw Error(ErrorCode::ConfigError, std::string(key) + ": expected [u, v] pairs");
    pts.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return pts;
}

}  // namespace

ImageTrack Config::image_track() const {
  if (track) return ImageTrack(*track);
  return ImageTrack(sim::default_track_waypoints(scenario.camera()));
}

Geofence Config::geofence() const {
  if (fence) return Geofence(*fence);
  return Geofence(sim::default_fence_vertices(scenario.camera()));
}

Config config_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, "config must be a JSON object");
  Config c;
  c.train.shape.crop_size = c.scenario.crop_size;
  std::set<std::string> known{"track", "fence"};
  visit_fields(c, [&](const char* name, auto& field) {
    known.insert(name);
    auto it = j.find(name);
    if (it == j.end()) return;
    using T = std::decay_t<decltype(field)>;
    if (!it->is_number())
      throw Error(ErrorCode::ConfigError, std::string(name) + ": expected a number");
    if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer())
        throw Error(ErrorCode::ConfigError, std::string(name) + ": expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (it->is_number_unsigned() == false && it->get<long long>() < 0)
          throw Error(ErrorCode::ConfigError, std::string(name) + ": expected a non-negative integer");
      }
    }
    field = it->get<T>();
  });
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw Error(ErrorCode::ConfigError, "unknown config key: " + key);
  }
  if (j.contains("track")) c.track = points_from_json(j["track"], "track");
  if (j.contains("fence")) c.fence = points_from_json(j["fence"], "fence");
  c.train.shape.crop_size = c.scenario.crop_size;
  if (c.scenario.tick_rate <= 0.0) throw Error(ErrorCode::ConfigError, "tick_rate must be positive");
  if (c.runs < 0) throw Error(ErrorCode::ConfigError, "runs must be non-negative");
  try {
    c.train.shape.validate();
    if (c.track) c.image_track();
    if (c.fence) c.geofence();
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
  return c;
}

json config_to_json(const Config& config) {
  json j = json::object();
  visit_fields(config, [&](const char* name, const auto& field) { j[name] = field; });
  if (config.track) j["track"] = points_to_json(*config.track);
  if (config.fence) j["fence"] = points_to_json(*config.fence);
  return j;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("config parse error: ") + e.what());
  }
  return config_from_json(j);
}

}  // namespace deskservo::service
