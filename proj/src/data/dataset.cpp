#include <algorithm>

#include "deskservo/data.hpp"

namespace deskservo::data {

std::vector<const OrientationLabel*> Dataset::select(Split which) const {
  std::vector<const OrientationLabel*> out;
  for (std::size_t i = 0; i < entries.size(); ++i)
    if (marks[i] == which) out.push_back(&entries[i]);
  return out;
}

std::size_t Dataset::count(Split which) const {
  return static_cast<std::size_t>(std::count(marks.begin(), marks.end(), which));
}

namespace {

void mark_validation(std::vector<Split>& marks, std::size_t train_count) {
  const std::size_t val = train_count / 10;
  for (std::size_t i = train_count - val; i < train_count; ++i) marks[i] = Split::Val;
}

}  // namespace

Dataset split(std::vector<OrientationLabel> entries, double test_duration) {
  if (entries.empty()) throw Error(ErrorCode::InsufficientData, "no entries to split");
  for (std::size_t i = 1; i < entries.size(); ++i)
    if (entries[i].t < entries[i - 1].t)
      throw Error(ErrorCode::NonMonotonicTimestamp, "dataset entries must be ordered by time");
  const double t_end = entries.back().t;
  if (test_duration < 0.0 ||
      (test_duration > 0.0 && !(t_end - entries.front().t > test_duration)))
    throw Error(ErrorCode::InsufficientData, "recording is not longer than the test window");

  Dataset ds;
  ds.marks.assign(entries.size(), Split::Train);
  std::size_t train_count = entries.size();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].t > t_end - test_duration) {
      train_count = std::min(train_count, i);
      ds.marks[i] = Split::Test;
    }
  }
  mark_validation(ds.marks, train_count);
  ds.entries = std::move(entries);
  return ds;
}

Dataset restrict_training(const Dataset& full, double fraction) {
  Dataset out;
  std::vector<const OrientationLabel*> training;
  std::vector<const OrientationLabel*> test;
  for (std::size_t i = 0; i < full.entries.size(); ++i)
    (full.marks[i] == Split::Test ? test : training).push_back(&full.entries[i]);
  const auto keep = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(fraction * static_cast<double>(training.size()))));
  if (training.empty()) throw Error(ErrorCode::InsufficientData, "no training entries");
  for (std::size_t i = 0; i < std::min(keep, training.size()); ++i) {
    out.entries.push_back(*training[i]);
    out.marks.push_back(Split::Train);
  }
  mark_validation(out.marks, out.entries.size());
  for (const auto* e : test) {
    out.entries.push_back(*e);
    out.marks.push_back(Split::Test);
  }
  return out;
}

}  // namespace deskservo::data
