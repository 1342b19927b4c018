#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "deskservo/estimator.hpp"
#include "deskservo/simd/kernels.hpp"

namespace deskservo::estimator {

std::string_view to_string(HeadKind kind) {
  return kind == HeadKind::Classification ? "classification" : "regression";
}

HeadKind head_kind_from_string(std::string_view name) {
  if (name == "classification") return HeadKind::Classification;
  if (name == "regression") return HeadKind::Regression;
  throw Error(ErrorCode::ConfigError, "unknown model kind '" + std::string(name) + "'");
}

void NetworkShape::validate() const {
  if (crop_size <= 0 || hidden <= 0 || pool <= 0 || bins < 2)
    throw Error(ErrorCode::ShapeMismatch, "network dimensions must be positive");
  if (hidden % pool != 0)
    throw Error(ErrorCode::ShapeMismatch, "hidden width must be a multiple of the pool size");
}

std::size_t Model::parameter_count(HeadKind kind, const NetworkShape& shape) {
  const std::size_t out = kind == HeadKind::Classification ? shape.bins : 1;
  const std::size_t h = shape.hidden;
  return h * shape.inputs() + h + out * shape.pooled() + out;
}

Model::Model(HeadKind kind, NetworkShape shape)
    : Model(kind, shape, std::vector<double>(parameter_count(kind, shape), 0.0)) {}

Model::Model(HeadKind kind, NetworkShape shape, std::vector<double> params)
    : kind_(kind), shape_(shape), params_(std::move(params)) {
  shape_.validate();
  if (params_.size() != parameter_count(kind_, shape_))
    throw Error(ErrorCode::ShapeMismatch, "parameter vector has " + std::to_string(params_.size()) +
                                              " entries, expected " +
                                              std::to_string(parameter_count(kind_, shape_)));
}

std::span<const double> Model::section(int which) const {
  const std::size_t h = shape_.hidden;
  const std::size_t out = outputs();
  const std::size_t sizes[4] = {h * shape_.inputs(), h, out * shape_.pooled(), out};
  std::size_t offset = 0;
  for (int i = 0; i < which; ++i) offset += sizes[i];
  return std::span<const double>(params_).subspan(offset, sizes[which]);
}

Model Model::initialize(HeadKind kind, NetworkShape shape, std::uint64_t seed) {
  Model m(kind, shape);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto p = m.params();
  const std::size_t n_w1 = m.w1().size();
  const std::size_t w2_begin = n_w1 + m.b1().size();
  const double s1 = 1.0 / std::sqrt(static_cast<double>(shape.inputs()));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(shape.pooled()));
  for (std::size_t i = 0; i < n_w1; ++i) p[i] = s1 * gauss(rng);
  for (std::size_t i = w2_begin; i < w2_begin + m.w2().size(); ++i) p[i] = s2 * gauss(rng);
  return m;
}

Activations run_network(const Model& model, const Crop& crop) {
  const NetworkShape& shape = model.shape();
  if (crop.size() != shape.crop_size)
    throw Error(ErrorCode::ShapeMismatch, "crop is " + std::to_string(crop.size()) +
                                              " px, model expects " +
                                              std::to_string(shape.crop_size));
  Activations act;
  act.input.resize(shape.inputs());
  const auto px = crop.pixels();
  for (std::size_t i = 0; i < act.input.size(); ++i) act.input[i] = px[i] - 0.5;

  act.hidden.resize(shape.hidden);
  simd::gemv(model.w1(), act.input, model.b1(), act.hidden);
  for (double& h : act.hidden) h = std::tanh(h);

  act.pooled.assign(shape.pooled(), 0.0);
  const double inv_pool = 1.0 / shape.pool;
  for (int j = 0; j < shape.pooled(); ++j) {
    double acc = 0.0;
    for (int k = 0; k < shape.pool; ++k) acc += act.hidden[j * shape.pool + k];
    act.pooled[j] = acc * inv_pool;
  }

  act.outputs.resize(model.outputs());
  simd::gemv(model.w2(), act.pooled, model.b2(), act.outputs);

  if (model.kind() == HeadKind::Classification) {
    act.probs = softmax(act.outputs);
    const Resultant r = circular_resultant(act.probs, model.bins());
    if (r.length() >= kMinResultant) act.angle = Angle(std::atan2(r.y, r.x));
  } else {
    act.angle = Angle(kPi * std::tanh(act.outputs[0]));
  }
  return act;
}

Prediction forward(const Model& model, const Crop& crop) {
  if (model.kind() != HeadKind::Classification)
    throw Error(ErrorCode::ShapeMismatch, "forward() needs a classification head");
  Activations act = run_network(model, crop);
  if (!act.angle)
    throw Error(ErrorCode::DegenerateExpectation, "output distribution has no mean direction");
  return {std::move(act.outputs), std::move(act.probs), *act.angle};
}

Angle predict(const Model& model, const Crop& crop) {
  const Activations act = run_network(model, crop);
  if (act.angle) return *act.angle;
  const auto top = std::max_element(act.probs.begin(), act.probs.end()) - act.probs.begin();
  return Angle(model.bins().center(static_cast<int>(top)));
}

double accumulate_gradient(const Model& model, const Crop& crop, Angle phi, double alpha,
                           std::span<double> grad) {
  if (grad.size() != model.params().size())
    throw Error(ErrorCode::ShapeMismatch, "gradient buffer does not match the parameters");
  const NetworkShape& shape = model.shape();
  const BinLayout bins = model.bins();
  const Activations act = run_network(model, crop);
  const double loss = loss_total(phi, act, bins, alpha);

  // ∂L/∂outputs
  std::vector<double> g_out(model.outputs(), 0.0);
  if (model.kind() == HeadKind::Classification) {
    const auto& p = act.probs;
    const int k = bins.count();
    if (act.angle) {
      // L_C = r², r = φ − φ̂ + 2πk  ⇒  ∂L_C/∂φ̂ = −2r.
      const double g_angle = -2.0 * wrapped_residual(phi, *act.angle);
      const Resultant res = circular_resultant(p, bins);
      const double r2 = res.x * res.x + res.y * res.y;
      // ∂φ̂/∂p_i = (x̄ sin β_i − ȳ cos β_i) / r²
      std::vector<double> g_p(k);
      double mean = 0.0;
      for (int i = 0; i < k; ++i) {
        g_p[i] = g_angle * (res.x * std::sin(bins.center(i)) - res.y * std::cos(bins.center(i))) / r2;
        mean += p[i] * g_p[i];
      }
      for (int i = 0; i < k; ++i) g_out[i] = p[i] * (g_p[i] - mean);
    }
    const int target = bins.nearest(phi);
    if (p[target] >= 1e-12) {
      for (int i = 0; i < k; ++i) g_out[i] += alpha * p[i];
      g_out[target] -= alpha;
    }
  } else {
    const double t = std::tanh(act.outputs[0]);
    const double g_angle = -2.0 * wrapped_residual(phi, *act.angle);
    g_out[0] = g_angle * kPi * (1.0 - t * t);
  }

  const std::size_t n_w1 = model.w1().size();
  const std::size_t n_b1 = model.b1().size();
  const std::size_t n_w2 = model.w2().size();
  auto g_w1 = grad.subspan(0, n_w1);
  auto g_b1 = grad.subspan(n_w1, n_b1);
  auto g_w2 = grad.subspan(n_w1 + n_b1, n_w2);
  auto g_b2 = grad.subspan(n_w1 + n_b1 + n_w2, g_out.size());

  simd::outer_acc(g_out, act.pooled, g_w2);
  simd::axpy(1.0, g_out, g_b2);

  std::vector<double> g_pooled(shape.pooled(), 0.0);
  simd::gemv_t_acc(model.w2(), g_out, g_pooled);

  std::vector<double> g_pre(shape.hidden);
  const double inv_pool = 1.0 / shape.pool;
  for (int i = 0; i < shape.hidden; ++i) {
    const double h = act.hidden[i];
    g_pre[i] = g_pooled[i / shape.pool] * inv_pool * (1.0 - h * h);
  }
  simd::outer_acc(g_pre, act.input, g_w1);
  simd::axpy(1.0, g_pre, g_b1);
  return loss;
}

Gradient backward(const Model& model, const Crop& crop, Angle phi, double alpha) {
  Gradient g;
  g.values.assign(model.params().size(), 0.0);
  g.loss = accumulate_gradient(model, crop, phi, alpha, g.values);
  return g;
}

}  // namespace deskservo::estimator
