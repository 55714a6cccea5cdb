#include "uuaudit/search_state.hpp"

#include <algorithm>

#include "uuaudit/distance.hpp"
#include "uuaudit/errors.hpp"

namespace uuaudit {

SearchState::SearchState(const TestSet& ts, std::optional<double> d_cap,
                         std::optional<std::size_t> budget)
    : d_cap_(d_cap ? *d_cap : diameter(ts)),
      budget_(budget ? *budget : ts.size()),
      labels_(ts.size()),
      uu_flag_(ts.size(), 0),
      nearest_(ts.size(), d_cap_) {
  if (d_cap_ < 0.0) throw DomainError("d_cap must be nonnegative");
  if (budget_ > ts.size()) {
    throw ConfigError("budget " + std::to_string(budget_) +
                      " exceeds test set size " + std::to_string(ts.size()));
  }
}

void SearchState::check_consistent(const TestSet& ts) const {
  if (ts.size() != size()) {
    throw ConsistencyError("search state covers " + std::to_string(size()) +
                           " points but the test set has " +
                           std::to_string(ts.size()));
  }
}

bool SearchState::begin_record(const TestSet& ts, std::size_t index,
                               std::string label) {
  check_consistent(ts);
  if (index >= size()) {
    throw ConsistencyError("point index " + std::to_string(index) +
                           " out of range");
  }
  if (labels_[index]) {
    throw ReuseError("point '" + ts[index].id + "' was already queried");
  }
  if (queried_.size() >= budget_) {
    throw ConfigError("query budget of " + std::to_string(budget_) +
                      " exhausted");
  }
  const bool uu = ts.is_uu(index, label);
  labels_[index] = std::move(label);
  queried_.push_back(index);
  if (uu) {
    uus_.push_back(index);
    uu_flag_[index] = 1;
  }
  return uu;
}

bool SearchState::record(const TestSet& ts, std::size_t index,
                         std::string label) {
  const bool uu = begin_record(ts, index, std::move(label));
  if (uu) {
    // The first discovery replaces the d_cap placeholder outright.
    const bool first = uus_.size() == 1;
    for (std::size_t x = 0; x < nearest_.size(); ++x) {
      const double d = point_distance(ts, x, index);
      nearest_[x] = first ? d : std::min(nearest_[x], d);
    }
  }
  return uu;
}

bool SearchState::record(const TestSet& ts, const PairwiseDistances& dist,
                         std::size_t index, std::string label) {
  const bool uu = begin_record(ts, index, std::move(label));
  if (uu) {
    const bool first = uus_.size() == 1;
    const auto row = dist.row(index);
    for (std::size_t x = 0; x < nearest_.size(); ++x) {
      nearest_[x] = first ? row[x] : std::min(nearest_[x], row[x]);
    }
  }
  return uu;
}

}  // namespace uuaudit
