#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "deskservo/service.hpp"

namespace deskservo::service {
namespace {

control::Mode mode_from_string(const std::string& s) {
  if (s == "FOLLOW") return control::Mode::Follow;
  if (s == "SPIN") return control::Mode::Spin;
  if (s == "DONE") return control::Mode::Done;
  throw Error(ErrorCode::InvalidState, "unknown controller mode: " + s);
}

json nan_as_null(double x) { return std::isnan(x) ? json(nullptr) : json(x); }

double null_as_nan(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace

json tick_to_json(const PipelineTick& tick) {
  json j;
  j["t"] = tick.t;
  j["frame"] = tick.frame;
  j["box"] = tick.box ? json{{"u", tick.box->center.u},
                             {"v", tick.box->center.v},
                             {"w", tick.box->width},
                             {"h", tick.box->height},
                             {"timestamp", tick.box->timestamp}}
                      : json(nullptr);
  if (tick.crop) {
    j["crop"] = data::encode_crop(*tick.crop);
    j["crop_size"] = tick.crop->size();
  } else {
    j["crop"] = nullptr;
  }
  j["estimate"] = tick.estimate ? json{{"u", tick.estimate->position.u},
                                       {"v", tick.estimate->position.v},
                                       {"heading", tick.estimate->heading.radians()}}
                                : json(nullptr);
  j["command_present"] = tick.command_present;
  j["v"] = tick.v;
  j["omega"] = tick.omega;
  j["mode"] = std::string(control::to_string(tick.mode));
  j["segment"] = tick.segment;
  j["image_cross_track"] = tick.image_cross_track;
  j["truth"] = {{"x", tick.truth.position.x},
                {"y", tick.truth.position.y},
                {"theta", tick.truth.heading.radians()}};
  return j;
}

PipelineTick tick_from_json(const json& j) {
  PipelineTick t;
  t.t = j.at("t").get<double>();
  t.frame = j.at("frame").get<std::uint64_t>();
  if (const auto& b = j.at("box"); !b.is_null()) {
    t.box = sim::BoundingBox{{b.at("u").get<double>(), b.at("v").get<double>()},
                             b.at("w").get<double>(),
                             b.at("h").get<double>(),
                             b.at("timestamp").get<double>()};
  }
  if (const auto& c = j.at("crop"); !c.is_null()) {
    t.crop = data::decode_crop(c.get<std::string>(), j.at("crop_size").get<int>());
  }
  if (const auto& e = j.at("estimate"); !e.is_null()) {
    t.estimate = control::ImagePose{{e.at("u").get<double>(), e.at("v").get<double>()},
                                    Angle(e.at("heading").get<double>())};
  }
  t.command_present = j.at("command_present").get<bool>();
  t.v = j.at("v").get<double>();
  t.omega = j.at("omega").get<double>();
  t.mode = mode_from_string(j.at("mode").get<std::string>());
  t.segment = j.at("segment").get<std::size_t>();
  t.image_cross_track = j.at("image_cross_track").get<double>();
  const auto& tr = j.at("truth");
  t.truth = {{tr.at("x").get<double>(), tr.at("y").get<double>()},
             Angle(tr.at("theta").get<double>())};
  return t;
}

json metrics_to_json(const RunMetrics& m) {
  return {{"max_ct", m.max_ct},
          {"mean_ct", m.mean_ct},
          {"rms_ct", m.rms_ct},
          {"ct_series", m.ct_series},
          {"median_heading_error_deg", nan_as_null(m.median_heading_error_deg)}};
}

RunMetrics metrics_from_json(const json& j) {
  RunMetrics m;
  m.max_ct = j.at("max_ct").get<double>();
  m.mean_ct = j.at("mean_ct").get<double>();
  m.rms_ct = j.at("rms_ct").get<double>();
  m.ct_series = j.at("ct_series").get<std::vector<double>>();
  m.median_heading_error_deg = null_as_nan(j.at("median_heading_error_deg"));
  return m;
}

json record_to_json(const RunRecord& r) {
  json ticks = json::array();
  for (const auto& t : r.ticks) ticks.push_back(tick_to_json(t));
  return {{"run_index", r.run_index},
          {"seed", r.seed},
          {"ground_truth_pose", r.ground_truth_pose},
          {"completed", r.completed},
          {"config", r.config},
          {"ticks", std::move(ticks)},
          {"metrics", metrics_to_json(r.metrics)}};
}

RunRecord record_from_json(const json& j) {
  RunRecord r;
  r.run_index = j.at("run_index").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.ground_truth_pose = j.at("ground_truth_pose").get<bool>();
  r.completed = j.at("completed").get<bool>();
  r.config = j.at("config");
  for (const auto& t : j.at("ticks")) r.ticks.push_back(tick_from_json(t));
  r.metrics = metrics_from_json(j.at("metrics"));
  return r;
}

void write_run_record(std::ostream& out, const RunRecord& r) {
  json header = {{"type", "header"},
                 {"run_index", r.run_index},
                 {"seed", r.seed},
                 {"ground_truth_pose", r.ground_truth_pose},
                 {"completed", r.completed},
                 {"config", r.config}};
  out << header.dump() << '\n';
  for (const auto& t : r.ticks) {
    json j = tick_to_json(t);
    j["type"] = "tick";
    out << j.dump() << '\n';
  }
  json m = metrics_to_json(r.metrics);
  m["type"] = "metrics";
  out << m.dump() << '\n';
}

RunRecord read_run_record(std::istream& in) {
  RunRecord r;
  bool have_header = false, have_metrics = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (type == "header") {
        r.run_index = j.at("run_index").get<int>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.ground_truth_pose = j.at("ground_truth_pose").get<bool>();
        r.completed = j.at("completed").get<bool>();
        r.config = j.at("config");
        have_header = true;
      } else if (type == "tick") {
        r.ticks.push_back(tick_from_json(j));
      } else if (type == "metrics") {
        r.metrics = metrics_from_json(j);
        have_metrics = true;
      } else {
        throw Error(ErrorCode::IoError, "unknown record line type: " + type);
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::IoError,
                  "run record line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header || !have_metrics)
    throw Error(ErrorCode::IoError, "run record is missing its header or metrics line");
  return r;
}

}  // namespace deskservo::service
