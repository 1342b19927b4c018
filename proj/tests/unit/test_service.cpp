#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <sstream>

#include "deskservo/service.hpp"
#include "oracles.hpp"

using namespace deskservo;
using namespace deskservo::service;

namespace {

bool throws_code(ErrorCode code, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code() == code;
  }
  return false;
}

std::string serialize(const RunRecord& r) {
  std::ostringstream out;
  write_run_record(out, r);
  return out.str();
}

Config short_config() {
  Config c;
  c.run_timeout = 60.0;
  return c;
}

}  // namespace

TEST_CASE("config round trip and validation") {
  Config c;
  c.scenario.seed = 99;
  c.gains.kp_ct = 0.03;
  c.wander.duration = 12.5;
  c.track = std::vector<ImagePoint>{{1, 2}, {3, 4}};
  const json j = config_to_json(c);
  const Config back = config_from_json(j);
  CHECK(config_to_json(back) == j);
  CHECK(back.scenario.seed == 99);
  CHECK(back.gains.kp_ct == 0.03);
  CHECK(back.track->at(1) == ImagePoint{3, 4});

  // Partial objects keep the defaults for missing keys.
  const Config partial = config_from_json(json{{"seed", 5}});
  CHECK(partial.scenario.seed == 5);
  CHECK(partial.gains.kp_h == control::ControllerGains{}.kp_h);

  CHECK(throws_code(ErrorCode::ConfigError, [] { config_from_json(json{{"sede", 5}}); }));
  CHECK(throws_code(ErrorCode::ConfigError, [] { config_from_json(json{{"seed", "five"}}); }));
  CHECK(throws_code(ErrorCode::ConfigError, [] { config_from_json(json{{"runs", 2.5}}); }));
  CHECK(throws_code(ErrorCode::ConfigError, [] { config_from_json(json{{"track", {1, 2}}}); }));
  CHECK(throws_code(ErrorCode::ConfigError, [] { config_from_json(json::array()); }));
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), Error);
}

TEST_CASE("default track and fence come from the camera") {
  const Config c;
  CHECK(c.image_track().segment_count() == 3);
  CHECK(c.geofence().vertices().size() == 4);
  const ImageTrack track = c.image_track();
  for (const auto& w : track.waypoints()) CHECK(contains(c.geofence(), w));
}

TEST_CASE("missed detection policy") {
  MissedDetectionPolicy p(0.5);
  p.on_detection(0.2, -0.3);
  const auto held = p.on_miss(0.05);
  REQUIRE(held);
  CHECK(held->first == 0.2);
  CHECK(held->second == -0.3);
  p.on_detection(0.1, 0.1);
  CHECK(p.missing_time() == 0.0);

  // A 1 s gap at 20 Hz: commands for the first 0.5 s, nothing after.
  int held_ticks = 0, stopped = 0;
  for (int i = 1; i <= 20; ++i) {
    const auto cmd = p.on_miss(0.05);
    if (cmd) {
      ++held_ticks;
      CHECK(i * 0.05 <= 0.5 + 1e-9);
    } else {
      ++stopped;
      CHECK(i * 0.05 > 0.5);
    }
  }
  CHECK(held_ticks == 10);
  CHECK(stopped == 10);
}

TEST_CASE("run metrics examples") {
  const std::vector<GroundPoint> line{{0.0, 1.0}, {1.0, 1.0}};
  const auto cam = sim::Scenario{}.camera();
  RunRecord on, off;
  for (int i = 0; i <= 10; ++i) {
    PipelineTick t;
    t.t = i * 0.05;
    t.truth = {{0.1 * i, 1.0}, Angle(0.0)};
    on.ticks.push_back(t);
    t.truth.position.y = 1.1;
    off.ticks.push_back(t);
  }
  const RunMetrics m0 = compute_run_metrics(on, line, cam);
  CHECK(m0.max_ct == 0.0);
  CHECK(std::isnan(m0.median_heading_error_deg));
  const RunMetrics m1 = compute_run_metrics(off, line, cam);
  CHECK(m1.max_ct == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(m1.mean_ct == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(m1.rms_ct == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(m1.ct_series.size() == 11);
  CHECK(throws_code(ErrorCode::EmptyRun, [&] { compute_run_metrics(RunRecord{}, line, cam); }));
}

TEST_CASE("ground-truth bypass completes the default track") {
  const Config c = short_config();
  const auto records = run_autonomy(c, c.image_track(), nullptr, 2);
  REQUIRE(records.size() == 2);
  for (const auto& r : records) {
    CHECK(r.completed);
    CHECK(r.ground_truth_pose);
    CHECK(r.ticks.back().mode == control::Mode::Done);
    CHECK(r.metrics.max_ct <= 0.05);
    // No detector in the loop: every tick carries a pose.
    for (const auto& t : r.ticks) CHECK(t.estimate.has_value());
  }
  CHECK(records[0].seed != records[1].seed);
}

TEST_CASE("persisted records round trip and recompute") {
  const Config c = short_config();
  auto gt = std::make_shared<GroundTruthEstimator>();
  const auto records = run_autonomy(c, c.image_track(), gt, 1);
  const RunRecord& r = records[0];
  REQUIRE(r.completed);
  const std::string text = serialize(r);
  std::istringstream in(text);
  const RunRecord back = read_run_record(in);
  CHECK(serialize(back) == text);
  CHECK(back.ticks.size() == r.ticks.size());
  CHECK(back.seed == r.seed);
  CHECK(back.config == r.config);
  for (std::size_t i = 0; i < r.ticks.size(); ++i) {
    CHECK(back.ticks[i].truth == r.ticks[i].truth);
    CHECK(back.ticks[i].box == r.ticks[i].box);
    CHECK(back.ticks[i].crop == r.ticks[i].crop);
    CHECK(back.ticks[i].v == r.ticks[i].v);
    CHECK(back.ticks[i].omega == r.ticks[i].omega);
    CHECK(back.ticks[i].mode == r.ticks[i].mode);
  }

  // Independent recomputation: pinhole unprojection of the waypoints and
  // dense-sampled distances from the persisted truth.
  const auto& sc = c.scenario;
  const oracle::Pinhole pin(sc.camera_height, sc.camera_tilt_deg * kPi / 180.0, sc.focal_px,
                            sc.image_width, sc.image_height);
  std::vector<Eigen::Vector2d> poly;
  const ImageTrack track = c.image_track();
  for (const auto& w : track.waypoints()) poly.push_back(pin.unproject(w.u, w.v));
  double max_ct = 0, sum = 0, sum2 = 0;
  for (const auto& t : back.ticks) {
    const Eigen::Vector2d p(t.truth.position.x, t.truth.position.y);
    double d = INFINITY;
    for (std::size_t i = 0; i + 1 < poly.size(); ++i)
      d = std::min(d, oracle::sampled_segment_distance(p, poly[i], poly[i + 1], 2000));
    max_ct = std::max(max_ct, d);
    sum += d;
    sum2 += d * d;
  }
  const double n = static_cast<double>(back.ticks.size());
  CHECK(std::abs(back.metrics.max_ct - max_ct) < 1e-9);
  CHECK(std::abs(back.metrics.mean_ct - sum / n) < 1e-9);
  CHECK(std::abs(back.metrics.rms_ct - std::sqrt(sum2 / n)) < 1e-9);
  CHECK(back.metrics.median_heading_error_deg < 1e-6);

  std::istringstream junk("{\"kind\":\"tick\"}\n");
  CHECK_THROWS_AS(read_run_record(junk), Error);
}

TEST_CASE("autonomy is deterministic per seed") {
  const Config c = short_config();
  auto gt = std::make_shared<GroundTruthEstimator>();
  const auto a = run_autonomy(c, c.image_track(), gt, 2);
  const auto b = run_autonomy(c, c.image_track(), gt, 2);
  for (std::size_t i = 0; i < 2; ++i) CHECK(serialize(a[i]) == serialize(b[i]));
  Config other = c;
  other.scenario.seed += 1;
  CHECK(serialize(run_autonomy(other, c.image_track(), gt, 1)[0]) != serialize(a[0]));
}

TEST_CASE("detection gaps hold state and resume on the same segment") {
  Config c = short_config();
  c.scenario.noise.dropout = 0.3;
  auto gt = std::make_shared<GroundTruthEstimator>();
  AutonomyRun run(c, c.image_track(), gt, 0);
  while (run.step()) {
  }
  const auto& ticks = run.record().ticks;
  std::size_t misses = 0;
  for (std::size_t i = 1; i < ticks.size(); ++i) {
    CHECK(ticks[i].segment >= ticks[i - 1].segment);
    if (!ticks[i].box) {
      ++misses;
      CHECK(ticks[i].segment == ticks[i - 1].segment);
      CHECK(ticks[i].mode == ticks[i - 1].mode);
      // A single missed frame repeats the previous command.
      if (ticks[i - 1].box && ticks[i - 1].command_present) {
        CHECK(ticks[i].v == ticks[i - 1].v);
        CHECK(ticks[i].omega == ticks[i - 1].omega);
      }
    }
    const bool coasting = !ticks[i].box;
    CHECK((ticks[i].command_present ? ticks[i].mode != control::Mode::Done : true));
    if (!coasting && ticks[i].mode != control::Mode::Done) CHECK(ticks[i].command_present);
  }
  CHECK(misses > 10);
  CHECK(run.record().completed);
}

TEST_CASE("learned inference fits the tick budget") {
  const auto model =
      estimator::Model::initialize(estimator::HeadKind::Classification, estimator::NetworkShape{}, 3);
  const LearnedEstimator est(model);
  sim::World world(sim::Scenario{});
  world.reset({{0.0, 1.6}, Angle(0.4)}, 1);
  const auto crop = world.render(*world.detect());
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < 200; ++i) est.estimate(crop, world);
  const double per_tick =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / 200.0;
  MESSAGE("inference per tick: " << per_tick * 1e3 << " ms");
  CHECK(per_tick < 0.010);
}

TEST_CASE("frame rendering") {
  sim::World world(sim::Scenario{});
  world.reset({{0.0, 1.6}, Angle(0.4)}, 1);
  const Config c;
  FrameOverlay overlay{c.image_track(), c.geofence(), world.detect()};
  const auto rgb = render_frame_rgb(world, overlay);
  CHECK(rgb.size() == 1280u * 720u * 3u);
  const auto png = encode_png(rgb, 1280, 720);
  const std::uint8_t sig[] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  REQUIRE(png.size() > 8);
  CHECK(std::equal(std::begin(sig), std::end(sig), png.begin()));
  CHECK(render_frame_rgb(world, overlay) == rgb);
}
