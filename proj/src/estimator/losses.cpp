#include <algorithm>
#include <cmath>

#include "deskservo/estimator.hpp"

namespace deskservo::estimator {

namespace {

constexpr double kProbFloor = 1e-12;

}  // namespace

// Signed residual of the branch selected by the wrap-aware minimum.
double wrapped_residual(Angle phi, Angle phi_hat) {
  const double base = phi.radians() - phi_hat.radians();
  double best = base;
  for (double shifted : {base + kTwoPi, base - kTwoPi})
    if (shifted * shifted < best * best) best = shifted;
  return best;
}

double loss_continuous(Angle phi, Angle phi_hat) {
  const double r = wrapped_residual(phi, phi_hat);
  return r * r;
}

double loss_discrete(Angle phi, std::span<const double> p, const BinLayout& bins) {
  if (static_cast<int>(p.size()) != bins.count())
    throw Error(ErrorCode::ShapeMismatch, "distribution does not match the bin layout");
  return -std::log(std::max(p[bins.nearest(phi)], kProbFloor));
}

double loss_total(Angle phi, const Activations& act, const BinLayout& bins, double alpha) {
  if (act.probs.empty()) {
    // Regression head: the prediction always exists.
    return loss_continuous(phi, *act.angle);
  }
  const double lc = act.angle ? loss_continuous(phi, *act.angle) : kPi * kPi;
  return lc + alpha * loss_discrete(phi, act.probs, bins);
}

}  // namespace deskservo::estimator
