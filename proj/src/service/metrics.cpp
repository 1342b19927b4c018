#include <algorithm>
#include <cmath>
#include <limits>

#include "deskservo/service.hpp"

namespace deskservo::service {

std::vector<GroundPoint> ground_polyline(const CameraModel& cam, const ImageTrack& track) {
  std::vector<GroundPoint> out;
  out.reserve(track.waypoints().size());
  for (const auto& w : track.waypoints()) out.push_back(cam.unproject(w));
  return out;
}

double distance_to_polyline(GroundPoint p, std::span<const GroundPoint> polyline) {
  if (polyline.empty()) throw Error(ErrorCode::EmptyInput, "empty polyline");
  double best = std::hypot(p.x - polyline[0].x, p.y - polyline[0].y);
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    const GroundPoint a = polyline[i], b = polyline[i + 1];
    const double ex = b.x - a.x, ey = b.y - a.y;
    const double len2 = ex * ex + ey * ey;
    double s = len2 > 0.0 ? ((p.x - a.x) * ex + (p.y - a.y) * ey) / len2 : 0.0;
    s = std::clamp(s, 0.0, 1.0);
    best = std::min(best, std::hypot(p.x - (a.x + s * ex), p.y - (a.y + s * ey)));
  }
  return best;
}

RunMetrics compute_run_metrics(const RunRecord& record, std::span<const GroundPoint> polyline,
                               const CameraModel& cam) {
  if (record.ticks.empty()) throw Error(ErrorCode::EmptyRun, "run has no ticks");
  RunMetrics m;
  double sum = 0.0, sum2 = 0.0;
  std::vector<double> heading_err;
  for (const auto& t : record.ticks) {
    const double d = distance_to_polyline(t.truth.position, polyline);
    m.ct_series.push_back(d);
    m.max_ct = std::max(m.max_ct, d);
    sum += d;
    sum2 += d * d;
    if (t.estimate) {
      const Angle truth = sim::in_image_heading(cam, t.truth);
      heading_err.push_back(std::abs(ang_diff(t.estimate->heading, truth)) * 180.0 / kPi);
    }
  }
  const double n = static_cast<double>(record.ticks.size());
  m.mean_ct = sum / n;
  m.rms_ct = std::sqrt(sum2 / n);
  m.median_heading_error_deg = heading_err.empty()
                                   ? std::numeric_limits<double>::quiet_NaN()
                                   : estimator::summarize_errors(std::move(heading_err)).median_deg;
  return m;
}

}  // namespace deskservo::service
