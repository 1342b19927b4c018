#include "commands.hpp"

#include <cmath>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "deskservo/server.hpp"

namespace deskservo::cli {

namespace fs = std::filesystem;
using service::json;

namespace {

fs::path out_path(const Globals& g, const std::string& name) {
  fs::create_directories(g.out);
  return fs::path(g.out) / name;
}

std::string input_path(const Globals& g, const std::string& given, const std::string& name) {
  return given.empty() ? (fs::path(g.out) / name).string() : given;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  return in;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  return out;
}

void write_json(const fs::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

json read_json(const std::string& path) {
  auto in = open_in(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::IoError, path + ": " + e.what());
  }
}

json box_json(const sim::BoundingBox& b) {
  return {{"u", b.center.u}, {"v", b.center.v}, {"w", b.width}, {"h", b.height}};
}

sim::BoundingBox box_from_json(const json& j) {
  return {{j.at("u").get<double>(), j.at("v").get<double>()},
          j.at("w").get<double>(),
          j.at("h").get<double>(),
          0.0};
}

json metrics_json(const estimator::EvalMetrics& m) {
  return {{"count", m.count},
          {"median_deg", m.median_deg},
          {"mean_deg", m.mean_deg},
          {"deciles_deg", m.deciles_deg}};
}

std::string fixed(double x, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << x;
  return s.str();
}

}  // namespace

service::Config resolve_config(const Globals& g) {
  service::Config c = g.config_path.empty() ? service::Config{} : service::load_config(g.config_path);
  if (g.seed) {
    c.scenario.seed = *g.seed;
    c.train.seed = *g.seed;
  }
  return c;
}

int collect_spins(const Globals& g, const SpinOptions& opt) {
  const auto config = resolve_config(g);
  sim::World world(config.scenario);
  world.reset(service::spin_start_pose(world.camera()), config.scenario.seed);

  data::Annotator annotate;
  if (!opt.annotations.empty()) {
    const json manual = read_json(opt.annotations);
    annotate = [manual](int location, bool first, const sim::BoundingBox&) {
      const std::string key = std::to_string(location);
      const char* end = first ? "first" : "last";
      if (!manual.contains(key) || !manual[key].contains(end))
        throw Error(ErrorCode::MissingEndpointAnnotation,
                    "no " + std::string(end) + " box for location " + key);
      return box_from_json(manual[key][end]);
    };
  }
  const auto locations = data::default_spin_locations(world.camera());
  const auto sessions = data::run_spin_collection(world, locations, config.spin, annotate);
  const double speed = data::calibrate_rotation(sessions);

  json out;
  out["calibrated_spin_speed"] = speed;
  out["sessions"] = json::array();
  for (const auto& s : sessions) {
    const auto boxes = data::interpolate_boxes(s);
    double iou_sum = 0.0;
    for (std::size_t i = 0; i < boxes.size(); ++i) iou_sum += sim::iou(boxes[i], s.frames[i].truth);
    out["sessions"].push_back({{"location", s.location},
                               {"revolutions", s.revolutions},
                               {"frames", s.frames.size()},
                               {"elapsed", s.elapsed()},
                               {"executed_rotation", s.executed_rotation},
                               {"first", box_json(*s.frames.front().annotation)},
                               {"last", box_json(*s.frames.back().annotation)},
                               {"mean_iou", iou_sum / static_cast<double>(boxes.size())}});
  }
  write_json(out_path(g, "spins.json"), out);
  std::cout << "spin sessions: " << sessions.size() << ", calibrated spin speed "
            << fixed(speed, 4) << " rad/s\n";
  return 0;
}

int wander(const Globals& g, const WanderOptions& opt) {
  const auto config = resolve_config(g);
  data::WanderConfig wc = config.wander;
  if (!opt.spins.empty()) wc.spin_speed = read_json(opt.spins).at("calibrated_spin_speed").get<double>();
  if (opt.duration) wc.duration = *opt.duration;
  sim::World world(config.scenario);
  const Geofence fence = config.geofence();
  world.reset(service::wander_start_pose(world.camera(), fence), config.scenario.seed);
  const auto frames = data::run_geofenced_wander(world, fence, wc, service::wander_seed(config));
  auto out = open_out(out_path(g, "wander.jsonl"));
  data::write_wander_log(out, frames);
  std::cout << "wander frames: " << frames.size() << '\n';
  return 0;
}

int label(const Globals& g, const std::string& log_path) {
  const auto config = resolve_config(g);
  auto in = open_in(input_path(g, log_path, "wander.jsonl"));
  const auto frames = data::read_wander_log(in);
  const auto labels = data::label_orientations(frames, config.label);
  auto out = open_out(out_path(g, "labels.jsonl"));
  data::write_labels(out, labels);
  std::cout << "labels: " << labels.size() << '\n';
  return 0;
}

int split(const Globals& g, const std::string& labels_path) {
  const auto config = resolve_config(g);
  auto in = open_in(input_path(g, labels_path, "labels.jsonl"));
  auto ds = data::split(data::read_labels(in), config.test_duration);
  auto out = open_out(out_path(g, "dataset.jsonl"));
  data::write_dataset(out, ds);
  std::cout << "train " << ds.count(data::Split::Train) << ", val " << ds.count(data::Split::Val)
            << ", test " << ds.count(data::Split::Test) << '\n';
  return 0;
}

int train(const Globals& g, const TrainOptions& opt) {
  const auto config = resolve_config(g);
  const auto kind = estimator::head_kind_from_string(opt.head);
  auto in = open_in(input_path(g, opt.dataset, "dataset.jsonl"));
  data::Dataset ds = data::read_dataset(in);
  estimator::TrainConfig tc = config.train;
  if (opt.fraction < 1.0) {
    data::Dataset scarce = data::restrict_training(ds, opt.fraction);
    tc.epochs = estimator::scarce_epochs(ds, scarce, tc);
    ds = std::move(scarce);
  }
  const auto result = estimator::train(ds, tc, kind);
  const std::string head(estimator::to_string(kind));
  estimator::save_checkpoint(out_path(g, "model-" + head + ".json").string(), result.model);
  json history = json::array();
  for (const auto& e : result.history) {
    history.push_back({{"epoch", e.epoch},
                       {"train_loss", e.train_loss},
                       {"val_median_deg", std::isnan(e.val_median_deg) ? json(nullptr)
                                                                       : json(e.val_median_deg)}});
  }
  write_json(out_path(g, "train-" + head + ".json"),
             {{"head", head}, {"best_epoch", result.best_epoch}, {"history", history}});
  std::cout << head << ": best epoch " << result.best_epoch << " of " << result.history.size()
            << ", " << fixed(result.seconds, 1) << " s\n";
  return 0;
}

int evaluate(const Globals& g, const std::string& model_path, const std::string& dataset_path,
             const std::string& split_name) {
  const auto model = estimator::load_checkpoint(input_path(g, model_path, "model-classification.json"));
  auto in = open_in(input_path(g, dataset_path, "dataset.jsonl"));
  const auto ds = data::read_dataset(in);
  data::Split which;
  if (split_name == "train") which = data::Split::Train;
  else if (split_name == "val") which = data::Split::Val;
  else if (split_name == "test") which = data::Split::Test;
  else throw Error(ErrorCode::ConfigError, "unknown split: " + split_name);
  const auto m = estimator::evaluate(model, ds, which);
  json out = metrics_json(m);
  out["head"] = std::string(estimator::to_string(model.kind()));
  out["split"] = split_name;
  write_json(out_path(g, "eval.json"), out);
  std::cout << out["head"].get<std::string>() << " " << split_name << ": median "
            << fixed(m.median_deg, 2) << " deg over " << m.count << " samples\n";
  return 0;
}

int ablate(const Globals& g, const std::string& dataset_path) {
  const auto config = resolve_config(g);
  auto in = open_in(input_path(g, dataset_path, "dataset.jsonl"));
  const auto ds = data::read_dataset(in);
  const auto cells = estimator::run_ablation(ds, config.train, config.scarce_fraction);
  json out;
  out["scarce_fraction"] = config.scarce_fraction;
  out["cells"] = json::array();
  for (const auto& c : cells) {
    out["cells"].push_back({{"head", std::string(estimator::to_string(c.kind))},
                            {"regime", c.regime},
                            {"train_samples", c.train_samples},
                            {"test", metrics_json(c.test)}});
  }
  write_json(out_path(g, "ablation.json"), out);
  for (const auto& c : cells) {
    std::cout << std::left << std::setw(16) << estimator::to_string(c.kind) << std::setw(8)
              << c.regime << " median " << fixed(c.test.median_deg, 2) << " deg ("
              << c.train_samples << " train, " << fixed(c.train_seconds, 1) << " s)\n";
  }
  return 0;
}

int autonomy(const Globals& g, const AutonomyOptions& opt) {
  const auto config = resolve_config(g);
  std::shared_ptr<const service::HeadingEstimator> est;
  if (!opt.ground_truth_pose) {
    est = std::make_shared<service::LearnedEstimator>(
        estimator::load_checkpoint(input_path(g, opt.model, "model-classification.json")));
  }
  const int n = opt.runs.value_or(config.runs);
  const auto records = service::run_autonomy(config, config.image_track(), est, n);
  const fs::path dir = fs::path(g.out) / "runs";
  fs::create_directories(dir);
  json manifest;
  manifest["ground_truth_pose"] = opt.ground_truth_pose;
  manifest["config"] = service::config_to_json(config);
  manifest["runs"] = json::array();
  bool timed_out = false;
  for (const auto& r : records) {
    std::ostringstream name;
    name << "run-" << std::setw(3) << std::setfill('0') << r.run_index << ".jsonl";
    auto out = open_out(dir / name.str());
    service::write_run_record(out, r);
    const auto& m = r.metrics;
    manifest["runs"].push_back(
        {{"id", r.run_index},
         {"file", name.str()},
         {"seed", r.seed},
         {"completed", r.completed},
         {"ticks", r.ticks.size()},
         {"max_ct", m.max_ct},
         {"mean_ct", m.mean_ct},
         {"rms_ct", m.rms_ct},
         {"median_heading_error_deg", std::isnan(m.median_heading_error_deg)
                                          ? json(nullptr)
                                          : json(m.median_heading_error_deg)}});
    std::cout << "run " << r.run_index << ": " << (r.completed ? "done" : "TIMEOUT") << ", max "
              << fixed(100.0 * m.max_ct, 2) << " cm, mean " << fixed(100.0 * m.mean_ct, 2)
              << " cm\n";
    timed_out = timed_out || !r.completed;
  }
  write_json(dir / "manifest.json", manifest);
  if (timed_out) throw Error(ErrorCode::Timeout, "at least one run did not finish the track");
  return 0;
}

namespace {
service::Server* g_server = nullptr;
extern "C" void handle_signal(int) {
  if (g_server) std::thread([] { g_server->stop(); }).detach();
}
}  // namespace

int serve(const Globals& g, const ServeOptions& opt) {
  const auto config = resolve_config(g);
  std::optional<estimator::Model> model;
  if (!opt.model.empty()) model = estimator::load_checkpoint(opt.model);
  service::Session session(config, model);
  service::Server server(session, config);
  server.start(opt.address, static_cast<unsigned short>(opt.port.value_or(config.port)));
  std::cout << "serving on http://" << opt.address << ":" << server.port() << "/api/v1" << std::endl;
  g_server = &server;
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  server.wait();
  g_server = nullptr;
  return 0;
}

int report(const Globals& g) {
  json out;
  std::ostringstream text;
  const fs::path ablation = fs::path(g.out) / "ablation.json";
  if (fs::exists(ablation)) {
    const json a = read_json(ablation.string());
    out["ablation"] = a;
    text << "Orientation estimator ablation (test median / mean, deg)\n";
    text << std::left << std::setw(16) << "head" << std::setw(10) << "regime" << std::setw(10)
         << "train" << std::setw(10) << "median" << "mean\n";
    for (const auto& c : a.at("cells")) {
      text << std::left << std::setw(16) << c.at("head").get<std::string>() << std::setw(10)
           << c.at("regime").get<std::string>() << std::setw(10)
           << c.at("train_samples").get<std::size_t>() << std::setw(10)
           << fixed(c.at("test").at("median_deg").get<double>(), 2)
           << fixed(c.at("test").at("mean_deg").get<double>(), 2) << '\n';
    }
    text << '\n';
  }
  const fs::path manifest_path = fs::path(g.out) / "runs" / "manifest.json";
  if (fs::exists(manifest_path)) {
    const json manifest = read_json(manifest_path.string());
    auto series = open_out(out_path(g, "crosstrack.jsonl"));
    json runs = json::array();
    text << "Autonomy runs (ground-plane cross-track, cm)\n";
    text << std::left << std::setw(6) << "run" << std::setw(10) << "done" << std::setw(10) << "max"
         << std::setw(10) << "mean" << "rms\n";
    for (const auto& entry : manifest.at("runs")) {
      auto in = open_in((manifest_path.parent_path() / entry.at("file").get<std::string>()).string());
      const auto record = service::read_run_record(in);
      const auto& m = record.metrics;
      for (std::size_t i = 0; i < record.ticks.size(); ++i) {
        series << json{{"run", record.run_index}, {"t", record.ticks[i].t}, {"cross_track", m.ct_series[i]}}.dump()
               << '\n';
      }
      runs.push_back({{"run", record.run_index},
                      {"completed", record.completed},
                      {"max_ct", m.max_ct},
                      {"mean_ct", m.mean_ct},
                      {"rms_ct", m.rms_ct}});
      text << std::left << std::setw(6) << record.run_index << std::setw(10)
           << (record.completed ? "yes" : "no") << std::setw(10) << fixed(100.0 * m.max_ct, 2)
           << std::setw(10) << fixed(100.0 * m.mean_ct, 2) << fixed(100.0 * m.rms_ct, 2) << '\n';
    }
    out["runs"] = runs;
    out["ground_truth_pose"] = manifest.at("ground_truth_pose");
  }
  if (out.is_null()) throw Error(ErrorCode::EmptyInput, "nothing to report in " + g.out);
  write_json(out_path(g, "report.json"), out);
  auto txt = open_out(out_path(g, "report.txt"));
  txt << text.str();
  std::cout << text.str();
  return 0;
}

}  // namespace deskservo::cli
