#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "deskservo/geometry.hpp"
#include "deskservo/sim.hpp"
#include "oracles.hpp"

using namespace deskservo;

namespace {

CameraModel default_camera() { return sim::Scenario{}.camera(); }

}  // namespace

TEST_CASE("angle canonicalization and differences") {
  CHECK(Angle(-0.1).radians() == doctest::Approx(kTwoPi - 0.1).epsilon(1e-15));
  CHECK(Angle(kTwoPi).radians() == 0.0);
  CHECK(Angle(-1e-300).radians() < kTwoPi);
  CHECK(ang_diff(0.1, kTwoPi - 0.1) == doctest::Approx(0.2));
  CHECK(ang_diff(kPi, 0.0) == doctest::Approx(kPi));
  CHECK(ang_diff(0.0, kPi) == doctest::Approx(kPi));  // −π maps to π

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng), b = u(rng);
    const double d = ang_diff(a, b);
    CHECK(d > -kPi);
    CHECK(d <= kPi);
    CHECK(std::abs(d) == doctest::Approx(oracle::abs_angle_diff(a, b)).epsilon(1e-9));
  }
}

TEST_CASE("cross track sign and magnitude") {
  // Segment along +u: screen-left is v < 0.
  CHECK(cross_track({5, -3}, {0, 0}, {10, 0}) == doctest::Approx(3.0));
  CHECK(cross_track({5, 4}, {0, 0}, {10, 0}) == doctest::Approx(-4.0));
  CHECK_THROWS_AS(cross_track({1, 1}, {2, 2}, {2, 2}), Error);
}

TEST_CASE("distance to segment matches dense sampling") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (int i = 0; i < 20; ++i) {
    const ImagePoint p{u(rng), u(rng)}, a{u(rng), u(rng)}, b{u(rng), u(rng)};
    const double want = oracle::sampled_segment_distance({p.u, p.v}, {a.u, a.v}, {b.u, b.v});
    CHECK(std::abs(distance_to_segment(p, a, b) - want) < 1e-6);
    // The infinite line, as a long segment through a and b.
    const Eigen::Vector2d ea(a.u - 50.0 * (b.u - a.u), a.v - 50.0 * (b.v - a.v));
    const Eigen::Vector2d eb(a.u + 51.0 * (b.u - a.u), a.v + 51.0 * (b.v - a.v));
    const double line = oracle::sampled_segment_distance({p.u, p.v}, ea, eb, 200000);
    CHECK(std::abs(std::abs(cross_track(p, a, b)) - line) < 1e-6);
  }
}

TEST_CASE("homography matches an independent pinhole") {
  const auto cam = CameraModel::tilted(2.3, 35.0 * kPi / 180.0, 1100.0, 1280, 720);
  const oracle::Pinhole pin(2.3, 35.0 * kPi / 180.0, 1100.0, 1280, 720);
  for (double x : {-1.0, 0.0, 0.7}) {
    for (double y : {1.0, 1.6, 2.5}) {
      const ImagePoint p = cam.project({x, y});
      const auto q = pin.project(x, y);
      CHECK(p.u == doctest::Approx(q.x()).epsilon(1e-12));
      CHECK(p.v == doctest::Approx(q.y()).epsilon(1e-12));
    }
  }
  // World +y recedes toward the top of the image, +x goes right.
  CHECK(cam.project({0, 2.0}).v < cam.project({0, 1.0}).v);
  CHECK(cam.project({0.5, 1.5}).u > cam.project({0, 1.5}).u);
}

TEST_CASE("camera position offsets the pinhole") {
  const auto cam = CameraModel::tilted(2.0, 0.4, 900.0, 640, 480, {0.3, -0.2});
  const oracle::Pinhole pin(2.0, 0.4, 900.0, 640, 480, 0.3, -0.2);
  const auto p = cam.project({0.5, 1.2});
  const auto q = pin.project(0.5, 1.2);
  CHECK(p.u == doctest::Approx(q.x()).epsilon(1e-12));
  CHECK(p.v == doctest::Approx(q.y()).epsilon(1e-12));
}

TEST_CASE("unproject inverts project") {
  const auto cam = default_camera();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ux(-1.5, 1.5), uy(0.8, 3.0);
  for (int i = 0; i < 200; ++i) {
    const GroundPoint g{ux(rng), uy(rng)};
    const GroundPoint back = cam.unproject(cam.project(g));
    CHECK(std::abs(back.x - g.x) < 1e-9);
    CHECK(std::abs(back.y - g.y) < 1e-9);
  }
}

TEST_CASE("projected ground lines stay collinear") {
  const auto cam = default_camera();
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> ux(-1.5, 1.5), uy(0.8, 3.0), ut(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const GroundPoint a{ux(rng), uy(rng)}, b{ux(rng), uy(rng)};
    const double t = ut(rng);
    const GroundPoint m{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
    const ImagePoint pa = cam.project(a), pb = cam.project(b), pm = cam.project(m);
    const double len = norm(pb - pa);
    if (len < 1.0) continue;
    // Perpendicular distance of the projected midpoint from the line.
    CHECK(std::abs(cross_track(pm, pa, pb)) < 1e-9 * std::max(1.0, len));
  }
}

TEST_CASE("degenerate projection") {
  const auto cam = default_camera();
  // Points on the horizon line of the camera have w = 0.
  const Eigen::Matrix3d& h = cam.homography();
  // Ground points on the vanishing line have w = 0: solve at x = 0.
  const double y0 = -h(2, 2) / h(2, 1);
  CHECK_THROWS_AS(cam.project({0.0, y0}), Error);
  try {
    cam.project({0.0, y0});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateProjection);
  }
}

TEST_CASE("jacobian matches finite differences") {
  const auto cam = default_camera();
  const GroundPoint g{0.2, 1.5};
  const auto j = cam.jacobian(g);
  const double h = 1e-6;
  const auto px = cam.project({g.x + h, g.y}), mx = cam.project({g.x - h, g.y});
  const auto py = cam.project({g.x, g.y + h}), my = cam.project({g.x, g.y - h});
  CHECK(j(0, 0) == doctest::Approx((px.u - mx.u) / (2 * h)).epsilon(1e-6));
  CHECK(j(1, 0) == doctest::Approx((px.v - mx.v) / (2 * h)).epsilon(1e-6));
  CHECK(j(0, 1) == doctest::Approx((py.u - my.u) / (2 * h)).epsilon(1e-6));
  CHECK(j(1, 1) == doctest::Approx((py.v - my.v) / (2 * h)).epsilon(1e-6));
}

TEST_CASE("image track validation and headings") {
  CHECK_THROWS_AS(ImageTrack({{0, 0}}), Error);
  CHECK_THROWS_AS(ImageTrack({{0, 0}, {0, 0}}), Error);
  const ImageTrack t({{0, 0}, {10, 0}, {10, 10}});
  CHECK(t.segment_count() == 2);
  CHECK(t.segment_heading(0).radians() == doctest::Approx(0.0));
  CHECK(t.segment_heading(1).radians() == doctest::Approx(kPi / 2));  // v down
  CHECK(t.segment_length(1) == doctest::Approx(10.0));
}

TEST_CASE("nearest point on track") {
  const ImageTrack t({{0, 0}, {10, 0}, {10, 10}});
  const auto a = nearest_on_track({5, -2}, t);
  CHECK(a.segment == 0);
  CHECK(a.distance == doctest::Approx(2.0));
  CHECK(a.arc_length == doctest::Approx(5.0));
  const auto b = nearest_on_track({12, 6}, t);
  CHECK(b.segment == 1);
  CHECK(b.arc_length == doctest::Approx(16.0));
  // Equidistant from both segments at the corner: lower index wins.
  CHECK(nearest_on_track({11, -1}, t).segment == 0);
}

TEST_CASE("geofence validation") {
  CHECK_THROWS_AS(Geofence({{0, 0}, {1, 0}}), Error);
  // Bow tie self-intersects.
  CHECK_THROWS_AS(Geofence({{0, 0}, {10, 10}, {10, 0}, {0, 10}}), Error);
  // Collinear points have no area.
  CHECK_THROWS_AS(Geofence({{0, 0}, {5, 0}, {10, 0}}), Error);
  const Geofence square({{0, 0}, {10, 0}, {10, 10}, {0, 10}});
  CHECK(square.area() == doctest::Approx(100.0));
}

TEST_CASE("point in polygon boundary rule") {
  const Geofence square({{0, 0}, {10, 0}, {10, 10}, {0, 10}});
  CHECK(contains(square, {5, 5}));
  CHECK_FALSE(contains(square, {15, 5}));
  CHECK(contains(square, {0, 5}));    // on an edge
  CHECK(contains(square, {10, 10}));  // on a vertex
  CHECK(contains(square, {5, 0}));
  CHECK_FALSE(contains(square, {5, -1e-6}));
  const Geofence tri({{0, 0}, {10, 0}, {0, 10}});
  CHECK(contains(tri, {5, 5}));  // on the slanted edge
  CHECK(distance_to_boundary(square, {5, 3}) == doctest::Approx(3.0));
}

TEST_CASE("point in polygon agrees with ray casting on a concave fence") {
  const std::vector<ImagePoint> pts{{0, 0}, {20, 0}, {20, 20}, {10, 8}, {0, 20}};
  const Geofence fence(pts);
  std::vector<Eigen::Vector2d> poly;
  for (auto p : pts) poly.emplace_back(p.u, p.v);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-5.0, 25.0);
  int checked = 0;
  for (int i = 0; i < 5000; ++i) {
    const ImagePoint p{u(rng), u(rng)};
    if (distance_to_boundary(fence, p) < 1e-6) continue;
    CHECK(contains(fence, p) == oracle::ray_cast_inside(poly, {p.u, p.v}));
    ++checked;
  }
  CHECK(checked > 4900);
}
