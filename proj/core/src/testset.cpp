#include "uuaudit/testset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "uuaudit/errors.hpp"
#include "uuaudit/rng.hpp"

namespace uuaudit {

TestSet::TestSet(std::vector<TestPoint> points,
                 std::optional<std::string> critical_class)
    : points_(std::move(points)), critical_class_(std::move(critical_class)) {
  if (points_.empty()) throw ValidationError("test set is empty");
  dim_ = points_.front().features.size();

  index_.reserve(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const TestPoint& pt = points_[i];
    if (pt.features.size() != dim_) {
      throw DimensionError("point '" + pt.id + "' has " +
                           std::to_string(pt.features.size()) +
                           " features, expected " + std::to_string(dim_));
    }
    if (!std::isfinite(pt.confidence) || pt.confidence < 0.0 ||
        pt.confidence > 1.0) {
      throw ValidationError("point '" + pt.id +
                            "' has confidence outside [0,1]");
    }
    for (double f : pt.features) {
      if (!std::isfinite(f)) {
        throw ValidationError("point '" + pt.id + "' has a non-finite feature");
      }
    }
    if (!index_.emplace(pt.id, i).second) {
      throw ValidationError("duplicate point id '" + pt.id + "'");
    }
    if (std::find(classes_.begin(), classes_.end(), pt.predicted_class) ==
        classes_.end()) {
      classes_.push_back(pt.predicted_class);
    }
  }

  std::vector<std::size_t> order(points_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return points_[a].id < points_[b].id;
  });
  id_rank_.resize(points_.size());
  for (std::size_t r = 0; r < order.size(); ++r) id_rank_[order[r]] = r;

  if (critical_class_ &&
      std::find(classes_.begin(), classes_.end(), *critical_class_) ==
          classes_.end()) {
    warnings_.push_back("critical class '" + *critical_class_ +
                        "' is never predicted in this test set");
  }
}

std::optional<std::size_t> TestSet::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t TestSet::index_of(std::string_view id) const {
  auto idx = find(id);
  if (!idx) throw ConsistencyError("unknown point id '" + std::string(id) + "'");
  return *idx;
}

bool TestSet::is_uu(std::size_t i, std::string_view label) const {
  const TestPoint& pt = points_[i];
  if (label == pt.predicted_class) return false;
  return !critical_class_ || pt.predicted_class == *critical_class_;
}

TestSet TestSet::with_critical_class(
    std::optional<std::string> critical) const {
  return TestSet(points_, std::move(critical));
}

AuditData::AuditData(TestSet s, GroundTruth t)
    : set(std::move(s)), truth(std::move(t)) {
  if (truth.size() != set.size()) {
    throw DimensionError("ground truth has " + std::to_string(truth.size()) +
                         " entries for " + std::to_string(set.size()) +
                         " points");
  }
}

AuditData::AuditData(TestSet s) : set(std::move(s)), truth(set.size()) {}

bool AuditData::fully_labeled() const {
  return std::all_of(truth.begin(), truth.end(),
                     [](const auto& t) { return t.has_value(); });
}

AuditData sample_testset(const AuditData& data, std::size_t n,
                         std::uint64_t seed) {
  const std::size_t total = data.set.size();
  if (n == 0 || n > total) {
    throw DimensionError("sample size " + std::to_string(n) +
                          " outside [1, " + std::to_string(total) + "]");
  }
  // Partial Fisher-Yates over positions.
  std::vector<std::size_t> pos(total);
  std::iota(pos.begin(), pos.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + rng.below(total - i);
    std::swap(pos[i], pos[j]);
  }
  pos.resize(n);
  std::sort(pos.begin(), pos.end());

  std::vector<TestPoint> points;
  GroundTruth truth;
  points.reserve(n);
  truth.reserve(n);
  for (std::size_t p : pos) {
    points.push_back(data.set[p]);
    truth.push_back(data.truth[p]);
  }
  return AuditData(TestSet(std::move(points), data.set.critical_class()),
                   std::move(truth));
}

}  // namespace uuaudit
