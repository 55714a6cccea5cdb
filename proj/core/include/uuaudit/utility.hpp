#pragma once

#include <cstddef>
#include <span>

#include "uuaudit/search_state.hpp"
#include "uuaudit/testset.hpp"

namespace uuaudit {

/// Confidences are clamped to this before the reward is evaluated so the
/// reward stays finite at c = 1.
inline constexpr double kMaxRewardConfidence = 1.0 - 1e-6;

/// Reward for discovering an unknown unknown at confidence c:
/// ln(1 / (1 - c)). Throws DomainError unless 0 <= c <= 1.
double reward(double c);

struct UtilityValue {
  double total = 0.0;
  double reward_term = 0.0;   // sum of rewards over S
  double penalty_term = 0.0;  // mean distance to the nearest member of S
};

/// Facility-locations utility W(Q) = sum_{q in S} r(c_q) - mean_x m_x.
/// With S empty the penalty is d_cap.
UtilityValue facility_utility(const TestSet& ts, const SearchState& state);

/// E[W(Q + candidate)] evaluated as phi * W_with + (1 - phi) * W_without,
/// where W_with treats the candidate as a new unknown unknown.
/// Throws ReuseError if the candidate is already queried.
double expected_fl_utility(const TestSet& ts, const SearchState& state,
                           std::size_t candidate, double phi);

/// phi * (W_with - W_without), i.e. the candidate-dependent part of
/// expected_fl_utility. Selecting by this gives the same argmax.
double fl_gain(const TestSet& ts, const SearchState& state,
               std::size_t candidate, double phi);

/// exp(-d(x, q)).
double similarity(std::span<const double> x, std::span<const double> q);

/// Coverage utility U(Q) = sum_x c_x * max_{q in S} sim(x, q); 0 when S is
/// empty.
double coverage_utility(const TestSet& ts, const SearchState& state);

/// Expected increase of U when the candidate turns out to be a UU with
/// probability phi: phi * sum_x c_x * max(0, sim(x, cand) - best_x).
double expected_coverage_gain(const TestSet& ts, const SearchState& state,
                              std::size_t candidate, double phi);

namespace detail {

// Row-based kernels used by the search loops. `cand_dist` / `cand_sim` hold
// the candidate's distance / similarity to every point.
double fl_gain_row(const SearchState& state, double candidate_confidence,
                   double phi, std::span<const double> cand_dist);

double coverage_gain_row(const TestSet& ts, std::span<const double> best_sim,
                         double phi, std::span<const double> cand_sim);

// Per-point max similarity to S (0 when S is empty).
void best_similarity(const SearchState& state, std::span<double> out);

}  // namespace detail

}  // namespace uuaudit
