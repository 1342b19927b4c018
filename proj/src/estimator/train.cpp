#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "deskservo/estimator.hpp"
#include "deskservo/simd/kernels.hpp"

namespace deskservo::estimator {

EvalMetrics summarize_errors(std::vector<double> errors_deg) {
  if (errors_deg.empty()) throw Error(ErrorCode::EmptyDataset, "no samples to evaluate");
  std::sort(errors_deg.begin(), errors_deg.end());
  EvalMetrics m;
  m.count = errors_deg.size();
  // Linear interpolation between order statistics.
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(errors_deg.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, errors_deg.size() - 1);
    return errors_deg[lo] + (pos - static_cast<double>(lo)) * (errors_deg[hi] - errors_deg[lo]);
  };
  for (int i = 0; i <= 10; ++i) m.deciles_deg[i] = quantile(i / 10.0);
  m.median_deg = m.deciles_deg[5];
  m.mean_deg = std::accumulate(errors_deg.begin(), errors_deg.end(), 0.0) /
               static_cast<double>(errors_deg.size());
  return m;
}

EvalMetrics evaluate(const Model& model, std::span<const data::OrientationLabel* const> samples) {
  if (samples.empty()) throw Error(ErrorCode::EmptyDataset, "evaluation split is empty");
  std::vector<double> errors;
  errors.reserve(samples.size());
  for (const auto* s : samples) {
    const Angle est = predict(model, s->crop);
    errors.push_back(std::abs(ang_diff(s->phi, est)) * 180.0 / kPi);
  }
  return summarize_errors(std::move(errors));
}

EvalMetrics evaluate(const Model& model, const data::Dataset& dataset, data::Split which) {
  const auto samples = dataset.select(which);
  return evaluate(model, samples);
}

TrainResult train(const data::Dataset& dataset, const TrainConfig& config, HeadKind kind) {
  const auto start = std::chrono::steady_clock::now();
  const auto train_set = dataset.select(data::Split::Train);
  const auto val_set = dataset.select(data::Split::Val);
  if (train_set.empty()) throw Error(ErrorCode::EmptyDataset, "training split is empty");
  if (!(config.learning_rate > 0.0) || config.batch_size <= 0 || config.epochs <= 0 ||
      config.alpha < 0.0)
    throw Error(ErrorCode::ConfigError, "invalid training configuration");
  NetworkShape shape = config.shape;
  shape.crop_size = train_set.front()->crop.size();

  std::mt19937_64 rng(config.seed);
  Model model = Model::initialize(kind, shape, rng());
  std::vector<double> velocity(model.params().size(), 0.0);
  std::vector<double> grad(model.params().size(), 0.0);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result{model, {}, 0, 0.0};
  double best_val = std::numeric_limits<double>::infinity();

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(config.batch_size));
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t b = begin; b < end; ++b) {
        const auto* sample = train_set[order[b]];
        const Crop input = data::augment(sample->crop, config.augmentation, rng);
        loss_sum += accumulate_gradient(model, input, sample->phi, config.alpha, grad);
      }
      simd::momentum_step(model.params(), velocity, grad, config.learning_rate, config.momentum,
                          1.0 / static_cast<double>(end - begin));
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(order.size());
    stats.val_median_deg = val_set.empty() ? std::numeric_limits<double>::quiet_NaN()
                                           : evaluate(model, val_set).median_deg;
    result.history.push_back(stats);
    if (val_set.empty() || stats.val_median_deg < best_val) {
      best_val = val_set.empty() ? best_val : stats.val_median_deg;
      result.model = model;
      result.best_epoch = epoch;
    }
  }
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

int scarce_epochs(const data::Dataset& full, const data::Dataset& scarce, const TrainConfig& config) {
  const auto batches = [&](const data::Dataset& ds) {
    const std::size_t n = ds.count(data::Split::Train);
    const std::size_t b = static_cast<std::size_t>(config.batch_size);
    return std::max<std::size_t>(1, (n + b - 1) / b);
  };
  const std::size_t steps = batches(full) * static_cast<std::size_t>(config.epochs);
  return static_cast<int>((steps + batches(scarce) - 1) / batches(scarce));
}

std::vector<AblationCell> run_ablation(const data::Dataset& dataset, const TrainConfig& config,
                                       double scarce_fraction) {
  const data::Dataset scarce = data::restrict_training(dataset, scarce_fraction);
  std::vector<AblationCell> cells;
  for (HeadKind kind : {HeadKind::Regression, HeadKind::Classification}) {
    for (const auto* regime : {"full", "scarce"}) {
      const bool full = std::string_view(regime) == "full";
      const data::Dataset& ds = full ? dataset : scarce;
      TrainConfig cfg = config;
      if (!full) cfg.epochs = scarce_epochs(dataset, scarce, config);
      const TrainResult r = train(ds, cfg, kind);
      AblationCell cell;
      cell.kind = kind;
      cell.regime = regime;
      cell.train_samples = ds.count(data::Split::Train);
      cell.test = evaluate(r.model, ds, data::Split::Test);
      cell.train_seconds = r.seconds;
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

}  // namespace deskservo::estimator
