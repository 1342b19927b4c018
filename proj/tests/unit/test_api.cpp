#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <sstream>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "deskservo/server.hpp"

using namespace deskservo;
using namespace deskservo::service;

namespace {

json points(const std::vector<ImagePoint>& pts) {
  json a = json::array();
  for (const auto& p : pts) a.push_back({p.u, p.v});
  return {{"points", a}};
}

std::string serialize(const RunRecord& r) {
  std::ostringstream out;
  write_run_record(out, r);
  return out.str();
}

std::string serialize(const std::vector<data::WanderFrame>& frames) {
  std::ostringstream out;
  data::write_wander_log(out, frames);
  return out.str();
}

Config fast_config() {
  Config c;
  c.run_timeout = 60.0;
  return c;
}

const std::vector<ImagePoint> kBowtie{{100, 100}, {300, 300}, {300, 100}, {100, 300}};

}  // namespace

TEST_CASE("router validation and preconditions") {
  Session session(fast_config());
  ApiRouter api(session);

  auto r = api.handle("POST", "/api/v1/geofence", points(kBowtie).dump());
  CHECK(r.status == 400);
  CHECK(json::parse(r.body).at("code") == "InvalidGeometry");
  CHECK(api.handle("POST", "/api/v1/geofence", "not json").status == 400);
  CHECK(api.handle("POST", "/api/v1/track", points({{1, 1}}).dump()).status == 400);

  r = api.handle("POST", "/api/v1/mode", R"({"mode": "WANDER"})");
  CHECK(r.status == 409);
  CHECK(json::parse(r.body).at("code") == "MissingGeofence");
  r = api.handle("POST", "/api/v1/mode", R"({"mode": "AUTONOMY", "params": {"ground_truth_pose": true}})");
  CHECK(r.status == 409);
  CHECK(json::parse(r.body).at("code") == "MissingTrack");
  CHECK(api.handle("POST", "/api/v1/mode", R"({"mode": "FLY"})").status == 400);

  const auto track = sim::default_track_waypoints(sim::Scenario{}.camera());
  r = api.handle("POST", "/api/v1/track", points(track).dump());
  CHECK(r.status == 200);
  CHECK(json::parse(r.body) == points(track));
  // Learned mode without a model.
  r = api.handle("POST", "/api/v1/mode", R"({"mode": "AUTONOMY"})");
  CHECK(r.status == 409);
  CHECK(json::parse(r.body).at("code") == "MissingModel");

  CHECK(api.handle("GET", "/api/v1/runs/0").status == 404);
  CHECK(api.handle("GET", "/api/v1/runs/abc").status == 404);
  CHECK(api.handle("GET", "/api/v1/nothing").status == 404);
  CHECK(api.handle("GET", "/elsewhere").status == 404);
  CHECK(api.handle("POST", "/api/v1/state").status == 405);
  CHECK(api.handle("GET", "/api/v1/geofence").status == 405);
}

TEST_CASE("state and frame") {
  Session session(fast_config());
  ApiRouter api(session);
  auto r = api.handle("GET", "/api/v1/state");
  REQUIRE(r.status == 200);
  const json s = json::parse(r.body);
  CHECK(s.at("mode") == "IDLE");
  CHECK(s.at("geofence").is_null());
  CHECK(s.at("model_loaded") == false);

  r = api.handle("GET", "/api/v1/frame");
  REQUIRE(r.status == 200);
  CHECK(r.content_type == "image/png");
  CHECK(r.body.substr(0, 8) == std::string("\x89PNG\r\n\x1a\n", 8));
}

TEST_CASE("session wander matches the direct recording") {
  Config c = fast_config();
  Session session(c);
  ApiRouter api(session);
  const auto fence = sim::default_fence_vertices(c.scenario.camera());
  auto r = api.handle("POST", "/api/v1/geofence", points(fence).dump());
  REQUIRE(r.status == 200);
  CHECK(json::parse(r.body) == points(fence));
  r = api.handle("POST", "/api/v1/mode", R"({"mode": "WANDER", "params": {"duration": 15}})");
  REQUIRE(r.status == 200);
  session.advance();
  CHECK(session.snapshot()->mode == SessionMode::Wander);
  session.run_until_idle();
  CHECK(session.snapshot()->mode == SessionMode::Idle);

  sim::World world(c.scenario);
  const Geofence g(fence);
  world.reset(wander_start_pose(world.camera(), g), c.scenario.seed);
  data::WanderConfig wc = c.wander;
  wc.duration = 15.0;
  const auto direct = data::run_geofenced_wander(world, g, wc, wander_seed(c));
  CHECK(session.wander_frames().size() == 300);
  CHECK(serialize(session.wander_frames()) == serialize(direct));
  CHECK(session.snapshot()->labels == data::label_orientations(direct, c.label).size());
  CHECK(session.snapshot()->wander_frames == 300);
}

TEST_CASE("session autonomy matches the direct runs") {
  Config c = fast_config();
  const auto model =
      estimator::Model::initialize(estimator::HeadKind::Classification, estimator::NetworkShape{}, 4);
  Session session(c, model);
  ApiRouter api(session);
  const auto track = sim::default_track_waypoints(c.scenario.camera());
  REQUIRE(api.handle("POST", "/api/v1/track", points(track).dump()).status == 200);

  REQUIRE(api.handle("POST", "/api/v1/mode",
                     R"({"mode": "AUTONOMY", "params": {"ground_truth_pose": true}})")
              .status == 200);
  session.run_until_idle();
  REQUIRE(api.handle("POST", "/api/v1/mode", R"({"mode": "AUTONOMY"})").status == 200);
  session.run_until_idle();

  const auto gt = session.run(0);
  const auto learned = session.run(1);
  REQUIRE(gt);
  REQUIRE(learned);
  const ImageTrack t(track);
  // The session numbers runs like the CLI numbers a batch.
  const auto direct_gt = run_autonomy(c, t, nullptr, 1);
  CHECK(serialize(*gt) == serialize(direct_gt[0]));
  AutonomyRun second(c, t, std::make_shared<LearnedEstimator>(model), 1);
  while (second.step()) {
  }
  CHECK(serialize(*learned) == serialize(second.take_record()));

  const auto r = api.handle("GET", "/api/v1/runs/0");
  REQUIRE(r.status == 200);
  const json j = json::parse(r.body);
  CHECK(j.at("id") == 0);
  CHECK(j.at("metrics").at("max_ct").get<double>() == gt->metrics.max_ct);
  CHECK(record_from_json(j).ticks.size() == gt->ticks.size());
}

TEST_CASE("mode switch cancels the running activity") {
  Config c = fast_config();
  Session session(c);
  ApiRouter api(session);
  REQUIRE(api.handle("POST", "/api/v1/geofence",
                     points(sim::default_fence_vertices(c.scenario.camera())).dump())
              .status == 200);
  REQUIRE(api.handle("POST", "/api/v1/mode", R"({"mode": "WANDER"})").status == 200);
  for (int i = 0; i < 40; ++i) session.advance();
  REQUIRE(api.handle("POST", "/api/v1/mode", R"({"mode": "IDLE"})").status == 200);
  session.advance();
  CHECK(session.snapshot()->mode == SessionMode::Idle);
  // The switching tick also steps, so 40 ticks log 40 frames.
  CHECK(session.wander_frames().size() == 40);
  CHECK_FALSE(session.busy());
}

TEST_CASE("spin collection through the session") {
  Session session(fast_config());
  ApiRouter api(session);
  REQUIRE(api.handle("POST", "/api/v1/mode", R"({"mode": "COLLECT_SPINS"})").status == 200);
  session.advance();
  const auto s = session.snapshot();
  CHECK(s->mode == SessionMode::Idle);
  REQUIRE(s->calibrated_spin_speed);
  CHECK(*s->calibrated_spin_speed == doctest::Approx(1.2).epsilon(0.02));
  CHECK(session.spin_sessions().size() == 5);
}

TEST_CASE("snapshots are never torn") {
  Config c = fast_config();
  Session session(c);
  session.submit_geofence(Geofence(sim::default_fence_vertices(c.scenario.camera())));
  json params = {{"duration", 30.0}};
  REQUIRE(session.request_mode(SessionMode::Wander, params) == ModeRequestResult::Accepted);
  std::atomic<bool> done{false};
  std::atomic<int> checked{0}, bad{0};
  std::thread reader([&] {
    while (!done.load()) {
      const auto s = session.snapshot();
      if (s->mode == SessionMode::Wander && s->last_tick) {
        // The last tick and the frame count come from the same tick.
        if (s->last_tick->frame + 1 != s->wander_frames) ++bad;
        if (std::abs(s->last_tick->t - 0.05 * static_cast<double>(s->last_tick->frame)) > 1e-9) ++bad;
        ++checked;
      }
    }
  });
  session.run_until_idle();
  done = true;
  reader.join();
  CHECK(bad == 0);
  MESSAGE("snapshots checked: " << checked.load());
}

TEST_CASE("telemetry sinks receive one message per tick") {
  Config c = fast_config();
  Session session(c);
  std::vector<json> messages;
  const auto id = session.subscribe([&](const std::string& m) { messages.push_back(json::parse(m)); });
  session.submit_track(ImageTrack(sim::default_track_waypoints(c.scenario.camera())));
  REQUIRE(session.request_mode(SessionMode::Autonomy, {{"ground_truth_pose", true}}) ==
          ModeRequestResult::Accepted);
  session.run_until_idle();
  session.unsubscribe(id);
  const auto run = session.run(0);
  REQUIRE(run);
  REQUIRE(messages.size() == run->ticks.size());
  CHECK(messages.back().at("controller_mode") == "DONE");
  CHECK(messages.back().at("command").is_null());
  CHECK(messages.front().at("run") == 0);
  CHECK(messages[5].at("image_cross_track").get<double>() == run->ticks[5].image_cross_track);
}

namespace {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

std::pair<int, std::string> request(unsigned short port, http::verb verb, const std::string& target,
                                    const std::string& body = "") {
  asio::io_context ioc;
  tcp::socket socket(ioc);
  socket.connect({asio::ip::make_address("127.0.0.1"), port});
  http::request<http::string_body> req{verb, target, 11};
  req.set(http::field::host, "127.0.0.1");
  req.set(http::field::content_type, "application/json");
  req.body() = body;
  req.prepare_payload();
  http::write(socket, req);
  beast::flat_buffer buffer;
  http::response<http::string_body> res;
  http::read(socket, buffer, res);
  return {static_cast<int>(res.result_int()), res.body()};
}

}  // namespace

TEST_CASE("http and websocket over a real socket") {
  Config c = fast_config();
  c.real_time_factor = 50.0;
  Session session(c);
  Server server(session, c);
  server.start("127.0.0.1", 0);
  const unsigned short port = server.port();
  REQUIRE(port != 0);

  auto [status, body] = request(port, http::verb::get, "/api/v1/state");
  CHECK(status == 200);
  CHECK(json::parse(body).at("mode") == "IDLE");
  std::tie(status, body) = request(port, http::verb::post, "/api/v1/geofence", points(kBowtie).dump());
  CHECK(status == 400);
  std::tie(status, body) = request(port, http::verb::post, "/api/v1/mode", R"({"mode":"WANDER"})");
  CHECK(status == 409);

  asio::io_context ioc;
  websocket::stream<tcp::socket> ws(ioc);
  ws.next_layer().connect({asio::ip::make_address("127.0.0.1"), port});
  ws.handshake("127.0.0.1", "/api/v1/telemetry");

  std::tie(status, body) = request(port, http::verb::post, "/api/v1/track",
                                   points(sim::default_track_waypoints(c.scenario.camera())).dump());
  CHECK(status == 200);
  std::tie(status, body) = request(port, http::verb::post, "/api/v1/mode",
                                   R"({"mode":"AUTONOMY","params":{"ground_truth_pose":true}})");
  CHECK(status == 200);

  // Read telemetry until the run reports DONE.
  int received = 0;
  std::string last_mode;
  while (last_mode != "DONE" && received < 5000) {
    beast::flat_buffer buf;
    ws.read(buf);
    const json m = json::parse(beast::buffers_to_string(buf.data()));
    last_mode = m.at("controller_mode").get<std::string>();
    ++received;
  }
  CHECK(last_mode == "DONE");
  CHECK(received > 100);
  ws.close(websocket::close_code::normal);

  // The run is published once the owner loop finishes it.
  for (int i = 0; i < 200 && request(port, http::verb::get, "/api/v1/runs/0").first != 200; ++i)
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  std::tie(status, body) = request(port, http::verb::get, "/api/v1/runs/0");
  REQUIRE(status == 200);
  const json run = json::parse(body);
  CHECK(run.at("completed") == true);
  CHECK(run.at("metrics").at("max_ct").get<double>() <= 0.05);

  std::tie(status, body) = request(port, http::verb::get, "/api/v1/frame");
  CHECK(status == 200);
  CHECK(body.substr(1, 3) == "PNG");

  // Stopping the server closes open telemetry streams.
  websocket::stream<tcp::socket> idle(ioc);
  idle.next_layer().connect({asio::ip::make_address("127.0.0.1"), port});
  idle.handshake("127.0.0.1", "/api/v1/telemetry");
  std::thread stopper([&] { server.stop(); });
  beast::flat_buffer buf;
  beast::error_code ec;
  idle.read(buf, ec);
  stopper.join();
  CHECK(ec == websocket::error::closed);
  CHECK(idle.reason().code == websocket::close_code::going_away);
}
