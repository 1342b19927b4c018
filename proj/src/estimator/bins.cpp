#include <algorithm>
#include <cmath>
#include <string>

#include "deskservo/estimator.hpp"

namespace deskservo::estimator {

BinLayout::BinLayout(int count) : count_(count) {
  if (count < 2) throw Error(ErrorCode::ShapeMismatch, "need at least two angle bins");
}

int BinLayout::nearest(Angle phi) const {
  const auto j = static_cast<long>(std::floor(phi.radians() / width() + 0.5));
  return static_cast<int>(j % count_);
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  if (p.empty()) return p;
  const double top = *std::max_element(p.begin(), p.end());
  double sum = 0.0;
  for (double& v : p) {
    v = std::exp(v - top);
    sum += v;
  }
  for (double& v : p) v /= sum;
  return p;
}

Resultant circular_resultant(std::span<const double> p, const BinLayout& bins) {
  if (static_cast<int>(p.size()) != bins.count())
    throw Error(ErrorCode::ShapeMismatch, "distribution length " + std::to_string(p.size()) +
                                              " does not match " + std::to_string(bins.count()) +
                                              " bins");
  Resultant r;
  for (int i = 0; i < bins.count(); ++i) {
    r.x += p[i] * std::cos(bins.center(i));
    r.y += p[i] * std::sin(bins.center(i));
  }
  return r;
}

Angle circular_expectation(std::span<const double> p, const BinLayout& bins) {
  const Resultant r = circular_resultant(p, bins);
  if (!(r.length() >= kMinResultant))
    throw Error(ErrorCode::DegenerateExpectation,
                "resultant length " + std::to_string(r.length()) + " is below 1e-9");
  return Angle(std::atan2(r.y, r.x));
}

}  // namespace deskservo::estimator
