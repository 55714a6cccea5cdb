#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace uuaudit {

/// One unlabeled prediction of the audited classifier.
///
/// The true label is deliberately absent: it lives in GroundTruth and is only
/// reachable through an Oracle, so search code cannot read it.
struct TestPoint {
  std::string id;
  std::vector<double> features;
  double confidence = 0.0;  // classifier's confidence in predicted_class
  std::string predicted_class;
  std::optional<std::string> display_uri;

  friend bool operator==(const TestPoint&, const TestPoint&) = default;
};

/// Immutable, validated collection of test points sharing one feature space.
class TestSet {
 public:
  /// Throws ValidationError (empty set, bad confidence, duplicate id,
  /// non-finite feature) or DimensionError (ragged features).
  explicit TestSet(std::vector<TestPoint> points,
                   std::optional<std::string> critical_class = std::nullopt);

  std::size_t size() const { return points_.size(); }
  std::size_t dim() const { return dim_; }

  const TestPoint& operator[](std::size_t i) const { return points_[i]; }
  std::span<const TestPoint> points() const { return points_; }
  std::span<const double> features(std::size_t i) const {
    return points_[i].features;
  }
  double confidence(std::size_t i) const { return points_[i].confidence; }

  const std::optional<std::string>& critical_class() const {
    return critical_class_;
  }

  std::optional<std::size_t> find(std::string_view id) const;
  /// Like find() but throws ConsistencyError for unknown ids.
  std::size_t index_of(std::string_view id) const;

  /// Position of point i when all ids are sorted ascending. Used as the
  /// deterministic tie-breaker: lower rank wins.
  std::size_t id_rank(std::size_t i) const { return id_rank_[i]; }

  /// Whether an oracle answer of `label` for point i makes it an unknown
  /// unknown: the label disagrees with the prediction and, when a critical
  /// class is configured, the prediction is that class.
  bool is_uu(std::size_t i, std::string_view label) const;

  /// Distinct predicted classes in first-seen order.
  const std::vector<std::string>& predicted_classes() const {
    return classes_;
  }

  /// Non-fatal load diagnostics (e.g. critical class never predicted).
  const std::vector<std::string>& warnings() const { return warnings_; }

  TestSet with_critical_class(std::optional<std::string> critical) const;

  friend bool operator==(const TestSet& a, const TestSet& b) {
    return a.points_ == b.points_ && a.critical_class_ == b.critical_class_;
  }

 private:
  std::vector<TestPoint> points_;
  std::optional<std::string> critical_class_;
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::size_t> id_rank_;
  std::vector<std::string> classes_;
  std::vector<std::string> warnings_;
};

/// Hidden true labels aligned with TestSet positions. Only oracles,
/// file writers and offline evaluation read these.
using GroundTruth = std::vector<std::optional<std::string>>;

/// A test set together with whatever ground truth the source file carried.
struct AuditData {
  TestSet set;
  GroundTruth truth;

  AuditData(TestSet s, GroundTruth t);
  explicit AuditData(TestSet s);

  bool fully_labeled() const;

  friend bool operator==(const AuditData&, const AuditData&) = default;
};

/// Uniform sample of n points without replacement. The result keeps the
/// source row order and carries the critical class and ground truth over.
/// Throws DimensionError when n is 0 or exceeds the source size.
AuditData sample_testset(const AuditData& data, std::size_t n,
                         std::uint64_t seed);

}  // namespace uuaudit
