#include "deskservo/geometry.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace deskservo {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateProjection: return "DegenerateProjection";
    case ErrorCode::ZeroLengthSegment: return "ZeroLengthSegment";
    case ErrorCode::InvalidGeometry: return "InvalidGeometry";
    case ErrorCode::NonPositiveDt: return "NonPositiveDt";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::NonMonotonicTimestamp: return "NonMonotonicTimestamp";
    case ErrorCode::UnreachableLocation: return "UnreachableLocation";
    case ErrorCode::MissingEndpointAnnotation: return "MissingEndpointAnnotation";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::RobotLostTimeout: return "RobotLostTimeout";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::DegenerateExpectation: return "DegenerateExpectation";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::InvalidState: return "InvalidState";
    case ErrorCode::TooFewCorners: return "TooFewCorners";
    case ErrorCode::ModelLoadError: return "ModelLoadError";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::EmptyRun: return "EmptyRun";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

double ang_diff(double a, double b) {
  double d = std::remainder(a - b, kTwoPi);
  if (d <= -kPi) d += kTwoPi;
  return d;
}

double ang_diff(Angle a, Angle b) { return ang_diff(a.radians(), b.radians()); }

double cross_track(ImagePoint p, ImagePoint a, ImagePoint b) {
  const ImagePoint d = b - a;
  const double len = norm(d);
  if (len <= 0.0) throw Error(ErrorCode::ZeroLengthSegment, "cross_track on a zero-length segment");
  const ImagePoint r = p - a;
  // Screen-left of direction (du, dv) is (dv, -du) when v points down.
  return (r.u * d.v - r.v * d.u) / len;
}

namespace {

// Parameter of the clamped projection of p onto a-b, in [0, 1].
double clamped_param(ImagePoint p, ImagePoint a, ImagePoint b) {
  const ImagePoint d = b - a;
  const double len2 = dot(d, d);
  if (len2 <= 0.0) return 0.0;
  return std::clamp(dot(p - a, d) / len2, 0.0, 1.0);
}

}  // namespace

double distance_to_segment(ImagePoint p, ImagePoint a, ImagePoint b) {
  const double t = clamped_param(p, a, b);
  return norm(p - (a + t * (b - a)));
}

ImageTrack::ImageTrack(std::vector<ImagePoint> waypoints) : waypoints_(std::move(waypoints)) {
  if (waypoints_.size() < 2)
    throw Error(ErrorCode::InvalidGeometry, "track needs at least two waypoints");
  for (const auto& w : waypoints_) {
    if (!std::isfinite(w.u) || !std::isfinite(w.v))
      throw Error(ErrorCode::InvalidGeometry, "non-finite waypoint");
  }
  for (std::size_t i = 0; i + 1 < waypoints_.size(); ++i) {
    if (norm(waypoints_[i + 1] - waypoints_[i]) <= 0.0)
      throw Error(ErrorCode::ZeroLengthSegment,
                  "consecutive waypoints " + std::to_string(i) + " and " + std::to_string(i + 1) +
                      " coincide");
  }
}

Angle ImageTrack::segment_heading(std::size_t i) const {
  const ImagePoint d = segment_end(i) - segment_start(i);
  return Angle(std::atan2(d.v, d.u));
}

double ImageTrack::segment_length(std::size_t i) const {
  return norm(segment_end(i) - segment_start(i));
}

TrackProjection nearest_on_track(ImagePoint p, const ImageTrack& track) {
  TrackProjection best;
  best.distance = std::numeric_limits<double>::infinity();
  double arc_before = 0.0;
  for (std::size_t i = 0; i < track.segment_count(); ++i) {
    const ImagePoint a = track.segment_start(i);
    const ImagePoint b = track.segment_end(i);
    const double t = clamped_param(p, a, b);
    const ImagePoint q = a + t * (b - a);
    const double d = norm(p - q);
    const double len = track.segment_length(i);
    // Near-equal distances keep the earlier segment.
    if (i == 0 || d < best.distance - 1e-12 * std::max(1.0, best.distance)) {
      best = {i, q, arc_before + t * len, d};
    }
    arc_before += len;
  }
  return best;
}

double signed_area(std::span<const ImagePoint> vertices) {
  double acc = 0.0;
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const ImagePoint& a = vertices[i];
    const ImagePoint& b = vertices[(i + 1) % n];
    acc += a.u * b.v - b.u * a.v;
  }
  return 0.5 * acc;
}

namespace {

double orient(ImagePoint a, ImagePoint b, ImagePoint c) {
  return (b.u - a.u) * (c.v - a.v) - (b.v - a.v) * (c.u - a.u);
}

bool on_segment(ImagePoint a, ImagePoint b, ImagePoint p) {
  return std::min(a.u, b.u) <= p.u && p.u <= std::max(a.u, b.u) && std::min(a.v, b.v) <= p.v &&
         p.v <= std::max(a.v, b.v);
}

bool segments_intersect(ImagePoint p1, ImagePoint p2, ImagePoint q1, ImagePoint q2) {
  const double d1 = orient(q1, q2, p1);
  const double d2 = orient(q1, q2, p2);
  const double d3 = orient(p1, p2, q1);
  const double d4 = orient(p1, p2, q2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  if (d1 == 0 && on_segment(q1, q2, p1)) return true;
  if (d2 == 0 && on_segment(q1, q2, p2)) return true;
  if (d3 == 0 && on_segment(p1, p2, q1)) return true;
  if (d4 == 0 && on_segment(p1, p2, q2)) return true;
  return false;
}

}  // namespace

bool is_simple_polygon(std::span<const ImagePoint> vertices) {
  const std::size_t n = vertices.size();
  if (n < 3) return false;
  for (const auto& v : vertices)
    if (!std::isfinite(v.u) || !std::isfinite(v.v)) return false;
  for (std::size_t i = 0; i < n; ++i)
    if (vertices[i] == vertices[(i + 1) % n]) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // Adjacent edges share exactly one vertex and are skipped.
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_intersect(vertices[i], vertices[(i + 1) % n], vertices[j],
                             vertices[(j + 1) % n]))
        return false;
    }
  }
  // Adjacent edges folding back onto each other.
  for (std::size_t i = 0; i < n; ++i) {
    const ImagePoint a = vertices[(i + n - 1) % n];
    const ImagePoint b = vertices[i];
    const ImagePoint c = vertices[(i + 1) % n];
    if (orient(a, b, c) == 0.0 && dot(a - b, c - b) > 0.0) return false;
  }
  return std::abs(signed_area(vertices)) > 0.0;
}

Geofence::Geofence(std::vector<ImagePoint> vertices) : vertices_(std::move(vertices)) {
  if (!is_simple_polygon(vertices_))
    throw Error(ErrorCode::InvalidGeometry, "geofence must be a simple polygon with positive area");
}

double Geofence::area() const { return std::abs(signed_area(vertices_)); }

double distance_to_boundary(const Geofence& fence, ImagePoint p) {
  const auto& vs = fence.vertices();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < vs.size(); ++i)
    best = std::min(best, distance_to_segment(p, vs[i], vs[(i + 1) % vs.size()]));
  return best;
}

bool contains(const Geofence& fence, ImagePoint p) {
  const auto& vs = fence.vertices();
  const std::size_t n = vs.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (distance_to_segment(p, vs[i], vs[(i + 1) % n]) <= 1e-9) return true;
  }
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const ImagePoint a = vs[i];
    const ImagePoint b = vs[j];
    if ((a.v > p.v) != (b.v > p.v)) {
      const double u_cross = a.u + (p.v - a.v) * (b.u - a.u) / (b.v - a.v);
      if (p.u < u_cross) inside = !inside;
    }
  }
  return inside;
}

}  // namespace deskservo
