#include "deskservo/sim.hpp"

namespace deskservo::sim {

CameraModel Scenario::camera() const {
  return CameraModel::tilted(camera_height, camera_tilt_deg * kPi / 180.0, focal_px, image_width,
                             image_height);
}

std::vector<ImagePoint> project_rect(const CameraModel& cam, const GroundRect& rect) {
  return {cam.project({rect.x_min, rect.y_min}), cam.project({rect.x_max, rect.y_min}),
          cam.project({rect.x_max, rect.y_max}), cam.project({rect.x_min, rect.y_max})};
}

std::vector<ImagePoint> default_track_waypoints(const CameraModel& cam) {
  return project_rect(cam, kDefaultTrackRect);
}

std::vector<ImagePoint> default_fence_vertices(const CameraModel& cam) {
  return project_rect(cam, kDefaultFenceRect);
}

}  // namespace deskservo::sim
