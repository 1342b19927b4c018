#include <Eigen/LU>

#include "deskservo/geometry.hpp"

namespace deskservo {

namespace {

constexpr double kMinHomogeneousW = 1e-12;

}  // namespace

CameraModel::CameraModel(const Eigen::Matrix3d& homography, int width, int height)
    : h_(homography), width_(width), height_(height) {
  if (!h_.allFinite()) throw Error(ErrorCode::InvalidGeometry, "homography has non-finite entries");
  if (width <= 0 || height <= 0) throw Error(ErrorCode::InvalidGeometry, "image size must be positive");
  const double det = h_.determinant();
  if (!(std::abs(det) > 0.0)) throw Error(ErrorCode::InvalidGeometry, "homography is singular");
  h_inv_ = h_.inverse();
}

CameraModel CameraModel::tilted(double height, double tilt_rad, double focal_px, int width,
                                int height_px, GroundPoint position) {
  if (height <= 0.0 || focal_px <= 0.0)
    throw Error(ErrorCode::InvalidGeometry, "camera height and focal length must be positive");
  const double s = std::sin(tilt_rad);
  const double c = std::cos(tilt_rad);
  // Rows are the camera axes (right, down, optical) in world coordinates.
  Eigen::Matrix3d rot;
  rot << 1.0, 0.0, 0.0,
         0.0, -c, -s,
         0.0, s, -c;
  const Eigen::Vector3d center(position.x, position.y, height);
  const Eigen::Vector3d t = -rot * center;
  Eigen::Matrix3d k;
  k << focal_px, 0.0, 0.5 * width,
       0.0, focal_px, 0.5 * height_px,
       0.0, 0.0, 1.0;
  Eigen::Matrix3d plane;
  plane.col(0) = rot.col(0);
  plane.col(1) = rot.col(1);
  plane.col(2) = t;
  return CameraModel(k * plane, width, height_px);
}

ImagePoint CameraModel::project(GroundPoint p) const {
  const Eigen::Vector3d q = h_ * Eigen::Vector3d(p.x, p.y, 1.0);
  if (!(std::abs(q.z()) >= kMinHomogeneousW))
    throw Error(ErrorCode::DegenerateProjection, "ground point maps to the line at infinity");
  return {q.x() / q.z(), q.y() / q.z()};
}

GroundPoint CameraModel::unproject(ImagePoint p) const {
  const Eigen::Vector3d q = h_inv_ * Eigen::Vector3d(p.u, p.v, 1.0);
  if (!(std::abs(q.z()) >= kMinHomogeneousW))
    throw Error(ErrorCode::DegenerateProjection, "image point is on the horizon");
  return {q.x() / q.z(), q.y() / q.z()};
}

Eigen::Matrix2d CameraModel::jacobian(GroundPoint p) const {
  const Eigen::Vector3d q = h_ * Eigen::Vector3d(p.x, p.y, 1.0);
  const double w = q.z();
  if (!(std::abs(w) >= kMinHomogeneousW))
    throw Error(ErrorCode::DegenerateProjection, "ground point maps to the line at infinity");
  Eigen::Matrix2d j;
  for (int col = 0; col < 2; ++col) {
    j(0, col) = (h_(0, col) * w - h_(2, col) * q.x()) / (w * w);
    j(1, col) = (h_(1, col) * w - h_(2, col) * q.y()) / (w * w);
  }
  return j;
}

}  // namespace deskservo
