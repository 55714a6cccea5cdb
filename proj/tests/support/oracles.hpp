#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "uuaudit/config.hpp"
#include "uuaudit/testset.hpp"
#include "uuaudit/trace.hpp"

// Slow reference implementations written directly from the formulas. They
// share no code paths with the library's caches or row kernels.
namespace uuaudit::testing {

double naive_distance(const TestPoint& a, const TestPoint& b);
double naive_diameter(const TestSet& ts);
double naive_reward(double c);

/// W(S) = sum_{q in S} r(c_q) - mean_x min_{q in S} d(x, q); -d_cap if empty.
double naive_facility(const TestSet& ts, const std::vector<std::size_t>& uus,
                      double d_cap);
/// phi * W(S + cand) + (1 - phi) * W(S).
double naive_expected_fl(const TestSet& ts, const std::vector<std::size_t>& uus,
                         std::size_t cand, double phi, double d_cap);

double naive_coverage(const TestSet& ts, const std::vector<std::size_t>& uus);
/// phi * U(S + cand) + (1 - phi) * U(S) - U(S).
double naive_expected_coverage_increase(const TestSet& ts,
                                        const std::vector<std::size_t>& uus,
                                        std::size_t cand, double phi);

double naive_logistic(const std::vector<double>& beta, double c,
                      const std::vector<double>& x, bool intercept = false);

/// Index maximising score(i) over eligible i; ties go to the smaller id
/// string. -1 when nothing is eligible.
long argmax_by_id(const TestSet& ts, const std::vector<bool>& eligible,
                  const std::function<double(std::size_t)>& score);

/// Facility-locations search recomputing both expectation branches for
/// every candidate at every step. phi: logistic on [c, x] (fitted with the
/// library's IRLS routine on a design the twin builds itself) once both
/// outcomes are seen, 1 - c before.
std::vector<TraceStep> twin_fl_search(const AuditData& data, const SearchConfig& cfg);

/// Coverage greedy recomputing U(S + cand) from scratch, with cluster rates
/// counted by hand over the library's k-means geometry.
std::vector<TraceStep> twin_coverage_search(const AuditData& data,
                                            const SearchConfig& cfg);

}  // namespace uuaudit::testing
