#include "uuaudit/utility.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "uuaudit/distance.hpp"
#include "uuaudit/errors.hpp"

namespace uuaudit {
namespace {

void check_candidate(const TestSet& ts, const SearchState& state,
                     std::size_t candidate) {
  state.check_consistent(ts);
  if (candidate >= ts.size()) {
    throw ConsistencyError("candidate index " + std::to_string(candidate) +
                           " out of range");
  }
  if (state.is_queried(candidate)) {
    throw ReuseError("candidate '" + ts[candidate].id +
                     "' has already been queried");
  }
}

void check_phi(double phi) {
  if (!(phi >= 0.0 && phi <= 1.0)) {
    throw DomainError("misclassification probability outside [0,1]");
  }
}

std::vector<double> candidate_distances(const TestSet& ts,
                                        std::size_t candidate) {
  std::vector<double> d(ts.size());
  for (std::size_t x = 0; x < ts.size(); ++x) {
    d[x] = point_distance(ts, x, candidate);
  }
  return d;
}

double reward_sum(const TestSet& ts, const SearchState& state) {
  double sum = 0.0;
  for (std::size_t q : state.uus()) sum += reward(ts.confidence(q));
  return sum;
}

}  // namespace

double reward(double c) {
  if (!(c >= 0.0 && c <= 1.0)) {
    throw DomainError("confidence " + std::to_string(c) + " outside [0,1]");
  }
  return -std::log1p(-std::min(c, kMaxRewardConfidence));
}

UtilityValue facility_utility(const TestSet& ts, const SearchState& state) {
  state.check_consistent(ts);
  UtilityValue v;
  v.reward_term = reward_sum(ts, state);
  if (state.uus().empty()) {
    v.penalty_term = state.d_cap();
  } else {
    double sum = 0.0;
    for (double m : state.nearest_uu_dist()) sum += m;
    v.penalty_term = sum / static_cast<double>(ts.size());
  }
  v.total = v.reward_term - v.penalty_term;
  return v;
}

double expected_fl_utility(const TestSet& ts, const SearchState& state,
                           std::size_t candidate, double phi) {
  check_candidate(ts, state, candidate);
  check_phi(phi);
  const double without = facility_utility(ts, state).total;

  const bool empty = state.uus().empty();
  const auto nearest = state.nearest_uu_dist();
  double penalty = 0.0;
  for (std::size_t x = 0; x < ts.size(); ++x) {
    const double d = point_distance(ts, x, candidate);
    penalty += empty ? d : std::min(nearest[x], d);
  }
  const double with = reward_sum(ts, state) + reward(ts.confidence(candidate)) -
                      penalty / static_cast<double>(ts.size());
  return phi * with + (1.0 - phi) * without;
}

double fl_gain(const TestSet& ts, const SearchState& state,
               std::size_t candidate, double phi) {
  check_candidate(ts, state, candidate);
  check_phi(phi);
  const auto d = candidate_distances(ts, candidate);
  return detail::fl_gain_row(state, ts.confidence(candidate), phi, d);
}

double similarity(std::span<const double> x, std::span<const double> q) {
  return std::exp(-euclidean_distance(x, q));
}

double coverage_utility(const TestSet& ts, const SearchState& state) {
  state.check_consistent(ts);
  if (state.uus().empty()) return 0.0;
  const auto nearest = state.nearest_uu_dist();
  double u = 0.0;
  for (std::size_t x = 0; x < ts.size(); ++x) {
    u += ts.confidence(x) * std::exp(-nearest[x]);
  }
  return u;
}

double expected_coverage_gain(const TestSet& ts, const SearchState& state,
                              std::size_t candidate, double phi) {
  check_candidate(ts, state, candidate);
  check_phi(phi);
  std::vector<double> best(ts.size());
  detail::best_similarity(state, best);
  std::vector<double> sim(ts.size());
  for (std::size_t x = 0; x < ts.size(); ++x) {
    sim[x] = std::exp(-point_distance(ts, x, candidate));
  }
  return detail::coverage_gain_row(ts, best, phi, sim);
}

namespace detail {

double fl_gain_row(const SearchState& state, double candidate_confidence,
                   double phi, std::span<const double> cand_dist) {
  const auto nearest = state.nearest_uu_dist();
  double improvement = 0.0;
  if (state.uus().empty()) {
    // Every point moves from the d_cap placeholder to its distance to the
    // candidate.
    const double cap = state.d_cap();
    for (double d : cand_dist) improvement += cap - d;
  } else {
    for (std::size_t x = 0; x < cand_dist.size(); ++x) {
      const double diff = nearest[x] - cand_dist[x];
      if (diff > 0.0) improvement += diff;
    }
  }
  return phi * (reward(candidate_confidence) +
                improvement / static_cast<double>(cand_dist.size()));
}

double coverage_gain_row(const TestSet& ts, std::span<const double> best_sim,
                         double phi, std::span<const double> cand_sim) {
  double gain = 0.0;
  for (std::size_t x = 0; x < cand_sim.size(); ++x) {
    const double diff = cand_sim[x] - best_sim[x];
    if (diff > 0.0) gain += ts.confidence(x) * diff;
  }
  return phi * gain;
}

void best_similarity(const SearchState& state, std::span<double> out) {
  if (state.uus().empty()) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const auto nearest = state.nearest_uu_dist();
  for (std::size_t x = 0; x < out.size(); ++x) out[x] = std::exp(-nearest[x]);
}

}  // namespace detail
}  // namespace uuaudit
