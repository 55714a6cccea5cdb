#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uuaudit/testset.hpp"

namespace uuaudit {

class PairwiseDistances;

/// Query bookkeeping for one search: the queried set Q with its oracle
/// labels, the discovered unknown unknowns S, and the cached distance from
/// every point to its nearest member of S (d_cap while S is empty).
///
/// Points are addressed by their position in the TestSet the state was
/// created for.
class SearchState {
 public:
  /// d_cap defaults to the diameter of ts. budget defaults to ts.size().
  explicit SearchState(const TestSet& ts,
                       std::optional<double> d_cap = std::nullopt,
                       std::optional<std::size_t> budget = std::nullopt);

  /// Applies one oracle answer. Returns whether the point became a UU.
  /// Throws ReuseError if already queried, ConfigError past the budget,
  /// ConsistencyError if index is out of range.
  bool record(const TestSet& ts, std::size_t index, std::string label);
  /// Same, reading distances from a precomputed table.
  bool record(const TestSet& ts, const PairwiseDistances& dist,
              std::size_t index, std::string label);

  std::size_t size() const { return nearest_.size(); }
  std::size_t budget() const { return budget_; }
  double d_cap() const { return d_cap_; }

  const std::vector<std::size_t>& queried() const { return queried_; }
  const std::vector<std::size_t>& uus() const { return uus_; }
  bool is_queried(std::size_t i) const { return labels_[i].has_value(); }
  bool is_uu(std::size_t i) const { return uu_flag_[i]; }
  const std::optional<std::string>& label(std::size_t i) const {
    return labels_[i];
  }
  std::size_t uu_count() const { return uus_.size(); }
  std::size_t correct_count() const { return queried_.size() - uus_.size(); }

  /// m_x for every point.
  std::span<const double> nearest_uu_dist() const { return nearest_; }

  /// Throws ConsistencyError unless this state was built for a test set of
  /// the same size.
  void check_consistent(const TestSet& ts) const;

 private:
  bool begin_record(const TestSet& ts, std::size_t index, std::string label);

  double d_cap_;
  std::size_t budget_;
  std::vector<std::size_t> queried_;
  std::vector<std::size_t> uus_;
  std::vector<std::optional<std::string>> labels_;
  std::vector<char> uu_flag_;
  std::vector<double> nearest_;
};

}  // namespace uuaudit
