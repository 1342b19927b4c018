#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace deskservo::cli;
  CLI::App app{"deskservo: desk-scale visual servoing in simulation"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config_path, "Flat JSON config file")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "Override the scenario and training seed");
  app.add_option("--out", g.out, "Output directory")->capture_default_str();

  SpinOptions spin_opt;
  auto* spins = app.add_subcommand("collect-spins", "Spin-on-the-spot sessions and rotation calibration");
  spins->add_option("--annotations", spin_opt.annotations, "Manual first/last boxes per location (JSON)");

  WanderOptions wander_opt;
  auto* wander_cmd = app.add_subcommand("wander", "Geofenced wander recording");
  wander_cmd->add_option("--spins", wander_opt.spins, "spins.json with the calibrated spin speed");
  wander_cmd->add_option("--duration", wander_opt.duration, "Recording length in seconds");

  std::string log_path;
  auto* label_cmd = app.add_subcommand("label", "Box-to-box orientation labels from a wander log");
  label_cmd->add_option("--log", log_path, "Wander log (default <out>/wander.jsonl)");

  std::string labels_path;
  auto* split_cmd = app.add_subcommand("split", "Chronological train/val/test split");
  split_cmd->add_option("--labels", labels_path, "Labels (default <out>/labels.jsonl)");

  TrainOptions train_opt;
  auto* train_cmd = app.add_subcommand("train", "Train an orientation estimator");
  train_cmd->add_option("--dataset", train_opt.dataset, "Dataset (default <out>/dataset.jsonl)");
  train_cmd->add_option("--head", train_opt.head, "classification or regression")
      ->check(CLI::IsMember({"classification", "regression"}));
  train_cmd->add_option("--fraction", train_opt.fraction, "Use the first fraction of train+val")
      ->check(CLI::Range(0.0, 1.0));

  std::string model_path, dataset_path, split_name = "test";
  auto* eval_cmd = app.add_subcommand("evaluate", "Median angular error of a checkpoint");
  eval_cmd->add_option("--model", model_path, "Checkpoint (default <out>/model-classification.json)");
  eval_cmd->add_option("--dataset", dataset_path, "Dataset (default <out>/dataset.jsonl)");
  eval_cmd->add_option("--split", split_name, "train, val or test")->check(CLI::IsMember({"train", "val", "test"}));

  std::string ablate_dataset;
  auto* ablate_cmd = app.add_subcommand("ablate", "Both heads on full and scarce training data");
  ablate_cmd->add_option("--dataset", ablate_dataset, "Dataset (default <out>/dataset.jsonl)");

  AutonomyOptions auto_opt;
  int runs = 0;
  auto* auto_cmd = app.add_subcommand("autonomy", "Closed-loop runs on the track");
  auto_cmd->add_option("--model", auto_opt.model, "Checkpoint (default <out>/model-classification.json)");
  auto_cmd->add_flag("--ground-truth-pose", auto_opt.ground_truth_pose, "Bypass detector and estimator");
  auto* runs_opt = auto_cmd->add_option("--runs", runs, "Number of runs (default from config)");

  ServeOptions serve_opt;
  int port = 0;
  auto* serve_cmd = app.add_subcommand("serve", "HTTP/WebSocket API under /api/v1");
  serve_cmd->add_option("--model", serve_opt.model, "Checkpoint for learned autonomy");
  serve_cmd->add_option("--address", serve_opt.address)->capture_default_str();
  auto* port_opt = serve_cmd->add_option("--port", port, "Port (default from config)");

  auto* report_cmd = app.add_subcommand("report", "Tables and cross-track series from <out>");

  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) g.seed = seed;
  if (*runs_opt) auto_opt.runs = runs;
  if (*port_opt) serve_opt.port = port;

  try {
    if (*spins) return collect_spins(g, spin_opt);
    if (*wander_cmd) return wander(g, wander_opt);
    if (*label_cmd) return label(g, log_path);
    if (*split_cmd) return split(g, labels_path);
    if (*train_cmd) return train(g, train_opt);
    if (*eval_cmd) return evaluate(g, model_path, dataset_path, split_name);
    if (*ablate_cmd) return ablate(g, ablate_dataset);
    if (*auto_cmd) return autonomy(g, auto_opt);
    if (*serve_cmd) return serve(g, serve_opt);
    if (*report_cmd) return report(g);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
