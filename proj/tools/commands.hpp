#pragma once

#include <optional>
#include <string>

#include "deskservo/service.hpp"

namespace deskservo::cli {

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
};

service::Config resolve_config(const Globals& g);

struct SpinOptions {
  std::string annotations;  // optional JSON file with manual boxes
};
int collect_spins(const Globals& g, const SpinOptions& opt);

struct WanderOptions {
  std::string spins;  // spins.json for the calibrated spin speed
  std::optional<double> duration;
};
int wander(const Globals& g, const WanderOptions& opt);

int label(const Globals& g, const std::string& log_path);
int split(const Globals& g, const std::string& labels_path);

struct TrainOptions {
  std::string dataset;
  std::string head = "classification";
  double fraction = 1.0;
};
int train(const Globals& g, const TrainOptions& opt);

int evaluate(const Globals& g, const std::string& model_path, const std::string& dataset_path,
             const std::string& split_name);
int ablate(const Globals& g, const std::string& dataset_path);

struct AutonomyOptions {
  std::string model;
  bool ground_truth_pose = false;
  std::optional<int> runs;
};
int autonomy(const Globals& g, const AutonomyOptions& opt);

struct ServeOptions {
  std::string model;
  std::string address = "127.0.0.1";
  std::optional<int> port;
};
int serve(const Globals& g, const ServeOptions& opt);

int report(const Globals& g);

}  // namespace deskservo::cli
