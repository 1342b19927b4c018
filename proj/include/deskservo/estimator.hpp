#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "deskservo/data.hpp"
#include "deskservo/geometry.hpp"

namespace deskservo::estimator {

using sim::Crop;

/// K equal bins with centers at i·2π/K.
class BinLayout {
 public:
  explicit BinLayout(int count = 100);

  int count() const { return count_; }
  double width() const { return kTwoPi / count_; }
  double center(int i) const { return i * width(); }
  /// Nearest center, exact halves rounded up, wrapped mod K.
  int nearest(Angle phi) const;

 private:
  int count_;
};

/// Probabilities over the bins of a BinLayout.
using AngleDistribution = std::vector<double>;

std::vector<double> softmax(std::span<const double> logits);

struct Resultant {
  double x = 0.0;
  double y = 0.0;
  double length() const { return std::hypot(x, y); }
};

Resultant circular_resultant(std::span<const double> p, const BinLayout& bins);

/// atan2 of the probability-weighted mean unit vector. Throws
/// DegenerateExpectation when the resultant is shorter than 1e-9.
Angle circular_expectation(std::span<const double> p, const BinLayout& bins);

inline constexpr double kMinResultant = 1e-9;

/// Residual φ − φ̂ + 2πk of the branch with the smallest square.
double wrapped_residual(Angle phi, Angle phi_hat);
/// Wrap-aware squared error: min over φ−φ̂, φ+2π−φ̂, φ−2π−φ̂.
double loss_continuous(Angle phi, Angle phi_hat);
/// −log p_j for the target bin j, p_j floored at 1e-12.
double loss_discrete(Angle phi, std::span<const double> p, const BinLayout& bins);

enum class HeadKind { Classification, Regression };

std::string_view to_string(HeadKind kind);
HeadKind head_kind_from_string(std::string_view name);

/// Dense tanh layer on the centered crop, average pooling over groups of
/// `pool` hidden units, then a single affine head (K logits, or one
/// scalar squashed by tanh for the regression baseline).
struct NetworkShape {
  int crop_size = 32;
  int hidden = 128;
  int pool = 2;
  int bins = 100;

  int inputs() const { return crop_size * crop_size; }
  int pooled() const { return hidden / pool; }
  void validate() const;
  bool operator==(const NetworkShape&) const = default;
};

class Model {
 public:
  Model(HeadKind kind, NetworkShape shape);
  Model(HeadKind kind, NetworkShape shape, std::vector<double> params);

  /// Scaled-Gaussian initialization, deterministic in `seed`.
  static Model initialize(HeadKind kind, NetworkShape shape, std::uint64_t seed);

  HeadKind kind() const { return kind_; }
  const NetworkShape& shape() const { return shape_; }
  int outputs() const { return kind_ == HeadKind::Classification ? shape_.bins : 1; }
  BinLayout bins() const { return BinLayout(shape_.bins); }

  std::span<const double> params() const { return params_; }
  std::span<double> params() { return params_; }

  // Views into params(): w1 is hidden × inputs, w2 is outputs × pooled.
  std::span<const double> w1() const { return section(0); }
  std::span<const double> b1() const { return section(1); }
  std::span<const double> w2() const { return section(2); }
  std::span<const double> b2() const { return section(3); }

  static std::size_t parameter_count(HeadKind kind, const NetworkShape& shape);

  bool operator==(const Model&) const = default;

 private:
  std::span<const double> section(int which) const;

  HeadKind kind_;
  NetworkShape shape_;
  std::vector<double> params_;
};

/// Intermediate activations of one forward pass.
struct Activations {
  std::vector<double> input;    // crop − 0.5
  std::vector<double> hidden;   // tanh outputs
  std::vector<double> pooled;
  std::vector<double> outputs;  // logits, or the single pre-tanh scalar
  std::vector<double> probs;    // classification only
  std::optional<Angle> angle;   // absent when the expectation is degenerate
};

Activations run_network(const Model& model, const Crop& crop);

struct Prediction {
  std::vector<double> logits;
  AngleDistribution distribution;
  Angle angle;
};

/// Classification forward pass; propagates DegenerateExpectation.
Prediction forward(const Model& model, const Crop& crop);

/// Inference for either head. A degenerate classification expectation
/// falls back to the most probable bin center.
Angle predict(const Model& model, const Crop& crop);

/// L_C + α·L_D for the classification head; L_C is replaced by π² when the
/// expectation is degenerate. Regression: wrap-aware L_C only.
double loss_total(Angle phi, const Activations& act, const BinLayout& bins, double alpha);

/// Adds ∂loss/∂params for one sample into `grad` and returns the loss.
double accumulate_gradient(const Model& model, const Crop& crop, Angle phi, double alpha,
                           std::span<double> grad);

struct Gradient {
  double loss = 0.0;
  std::vector<double> values;
};

Gradient backward(const Model& model, const Crop& crop, Angle phi, double alpha);

// ---------------------------------------------------------------------------
// Training and evaluation

struct TrainConfig {
  NetworkShape shape;
  double alpha = 1.0;
  double learning_rate = 1e-2;
  double momentum = 0.9;
  int batch_size = 64;
  int epochs = 30;
  std::uint64_t seed = 1;
  data::AugmentationParams augmentation;
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double val_median_deg = 0.0;  // NaN when the validation split is empty
};

struct TrainResult {
  Model model;
  std::vector<EpochStats> history;
  int best_epoch = 0;
  double seconds = 0.0;
};

/// Mini-batch SGD with momentum on the train split; keeps the epoch with
/// the lowest validation median (the last epoch when there is no val split).
TrainResult train(const data::Dataset& dataset, const TrainConfig& config, HeadKind kind);

struct EvalMetrics {
  std::size_t count = 0;
  double median_deg = 0.0;
  double mean_deg = 0.0;
  std::array<double, 11> deciles_deg{};  // 0%, 10%, ..., 100%
};

EvalMetrics summarize_errors(std::vector<double> errors_deg);
EvalMetrics evaluate(const Model& model, std::span<const data::OrientationLabel* const> samples);
EvalMetrics evaluate(const Model& model, const data::Dataset& dataset, data::Split which);

struct AblationCell {
  HeadKind kind;
  std::string regime;  // "full" or "scarce"
  std::size_t train_samples = 0;
  EvalMetrics test;
  double train_seconds = 0.0;
};

/// Epoch count giving the scarce split as many SGD steps as `config`
/// spends on the full split.
int scarce_epochs(const data::Dataset& full, const data::Dataset& scarce, const TrainConfig& config);

/// Both heads on the full training split and on its first `scarce_fraction`,
/// each regime with the same number of SGD steps.
std::vector<AblationCell> run_ablation(const data::Dataset& dataset, const TrainConfig& config,
                                       double scarce_fraction = 0.1);

// ---------------------------------------------------------------------------
// Checkpoints (versioned JSON: kind, shape, flat parameters)

inline constexpr int kCheckpointVersion = 1;

void save_checkpoint(std::ostream& out, const Model& model);
Model load_checkpoint(std::istream& in);
void save_checkpoint(const std::string& path, const Model& model);
Model load_checkpoint(const std::string& path);

}  // namespace deskservo::estimator
