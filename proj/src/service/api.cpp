#include <charconv>

#include "deskservo/server.hpp"

namespace deskservo::service {
namespace {

constexpr std::string_view kPrefix = "/api/v1";

HttpResponse json_response(int status, const json& body) {
  return {status, "application/json", body.dump()};
}

HttpResponse error_response(int status, std::string_view code, const std::string& message) {
  return json_response(status, {{"error", message}, {"code", code}});
}

std::vector<ImagePoint> parse_points(std::string_view body) {
  const json j = json::parse(body);
  const json& pts = j.is_object() ? j.at("points") : j;
  if (!pts.is_array()) throw Error(ErrorCode::InvalidGeometry, "points must be an array");
  std::vector<ImagePoint> out;
  for (const auto& p : pts) {
    if (p.is_array() && p.size() == 2 && p[0].is_number() && p[1].is_number()) {
      out.push_back({p[0].get<double>(), p[1].get<double>()});
    } else if (p.is_object() && p.contains("u") && p.contains("v")) {
      out.push_back({p["u"].get<double>(), p["v"].get<double>()});
    } else {
      throw Error(ErrorCode::InvalidGeometry, "each point must be [u, v] or {\"u\", \"v\"}");
    }
  }
  return out;
}

json points_json(const std::vector<ImagePoint>& pts) {
  json out = json::array();
  for (const auto& p : pts) out.push_back({p.u, p.v});
  return out;
}

}  // namespace

HttpResponse ApiRouter::handle(std::string_view method, std::string_view target,
                               std::string_view body) {
  std::string_view path = target.substr(0, target.find('?'));
  if (path.substr(0, kPrefix.size()) != kPrefix)
    return error_response(404, "NotFound", "unknown path");
  path.remove_prefix(kPrefix.size());
  const bool get = method == "GET";
  const bool post = method == "POST";

  try {
    if (path == "/frame") {
      if (!get) return error_response(405, "MethodNotAllowed", "use GET");
      const auto png = session_.frame_png();
      return {200, "image/png", std::string(png.begin(), png.end())};
    }
    if (path == "/state") {
      if (!get) return error_response(405, "MethodNotAllowed", "use GET");
      return json_response(200, snapshot_to_json(*session_.snapshot()));
    }
    if (path == "/geofence") {
      if (!post) return error_response(405, "MethodNotAllowed", "use POST");
      Geofence fence(parse_points(body));
      const json echo = {{"points", points_json(fence.vertices())}};
      session_.submit_geofence(std::move(fence));
      return json_response(200, echo);
    }
    if (path == "/track") {
      if (!post) return error_response(405, "MethodNotAllowed", "use POST");
      ImageTrack track(parse_points(body));
      const json echo = {{"points", points_json(track.waypoints())}};
      session_.submit_track(std::move(track));
      return json_response(200, echo);
    }
    if (path == "/mode") {
      if (!post) return error_response(405, "MethodNotAllowed", "use POST");
      const json j = json::parse(body);
      const auto mode = session_mode_from_string(j.at("mode").get<std::string>());
      if (!mode) return error_response(400, "InvalidMode", "unknown mode");
      const json params = j.value("params", json::object());
      switch (session_.request_mode(*mode, params)) {
        case ModeRequestResult::Accepted:
          return json_response(200, {{"mode", std::string(to_string(*mode))}});
        case ModeRequestResult::MissingGeofence:
          return error_response(409, "MissingGeofence", "WANDER needs a geofence");
        case ModeRequestResult::MissingTrack:
          return error_response(409, "MissingTrack", "AUTONOMY needs a track");
        case ModeRequestResult::MissingModel:
          return error_response(409, "MissingModel",
                                "AUTONOMY needs a loaded model or ground_truth_pose");
      }
    }
    if (path.substr(0, 6) == "/runs/") {
      if (!get) return error_response(405, "MethodNotAllowed", "use GET");
      const std::string_view id_text = path.substr(6);
      std::uint64_t id = 0;
      const auto [end, ec] = std::from_chars(id_text.data(), id_text.data() + id_text.size(), id);
      if (ec != std::errc{} || end != id_text.data() + id_text.size() || id_text.empty())
        return error_response(404, "UnknownRun", "unknown run");
      const auto record = session_.run(id);
      if (!record) return error_response(404, "UnknownRun", "unknown run");
      json j = record_to_json(*record);
      j["id"] = id;
      return json_response(200, j);
    }
  } catch (const json::exception& e) {
    return error_response(400, "BadRequest", e.what());
  } catch (const Error& e) {
    return error_response(400, to_string(e.code()), e.what());
  }
  return error_response(404, "NotFound", "unknown path");
}

}  // namespace deskservo::service
