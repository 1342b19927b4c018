#include <algorithm>
#include <string>

#include "deskservo/sim.hpp"

namespace deskservo::sim {

void GroundTruthLog::append(double t, const Pose2D& pose) {
  if (!samples_.empty() && !(t > samples_.back().t))
    throw Error(ErrorCode::NonMonotonicTimestamp,
                "timestamp " + std::to_string(t) + " does not follow " +
                    std::to_string(samples_.back().t));
  samples_.push_back({t, pose});
}

Pose2D GroundTruthLog::at(double t) const {
  if (samples_.empty() || t < samples_.front().t || t > samples_.back().t)
    throw Error(ErrorCode::OutOfRange, "query time " + std::to_string(t) + " outside the log");
  auto hi = std::lower_bound(samples_.begin(), samples_.end(), t,
                             [](const Sample& s, double q) { return s.t < q; });
  if (hi->t == t) return hi->pose;
  auto lo = std::prev(hi);
  const double w = (t - lo->t) / (hi->t - lo->t);
  Pose2D out;
  out.position.x = lo->pose.position.x + w * (hi->pose.position.x - lo->pose.position.x);
  out.position.y = lo->pose.position.y + w * (hi->pose.position.y - lo->pose.position.y);
  const double dth = ang_diff(hi->pose.heading, lo->pose.heading);
  out.heading = Angle(lo->pose.heading.radians() + w * dth);
  return out;
}

}  // namespace deskservo::sim
