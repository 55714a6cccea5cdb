#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "uuaudit/testset.hpp"
#include "uuaudit/trace.hpp"

namespace uuaudit {

/// Standardised discovery ratio |S| / sum over queried points of (1 - c).
/// nullopt when the trace is empty or every queried confidence is 1.
std::optional<double> sdr(const QueryTrace& trace);
std::optional<double> sdr(std::span<const TraceStep> steps);

enum class UtilityKind { facility, coverage };

/// Utility after each prefix of the trace, recomputed from scratch.
/// facility reports W(Q) + d_cap, the gain over the empty query set, so the
/// series starts at 0; coverage reports U(Q). Throws ConsistencyError for
/// ids not in ts.
std::vector<double> utility_trajectory(const TestSet& ts, const QueryTrace& trace,
                                       UtilityKind which);

/// Raw W(Q) after each prefix, recomputed from scratch.
std::vector<double> facility_utility_series(const TestSet& ts,
                                            const QueryTrace& trace);

/// Empirical quantile with linear interpolation between order statistics
/// (h = (N - 1) p). Throws InsufficientDataError on empty input.
double quantile(std::vector<double> values, double p);

struct Band {
  double median = 0.0;
  double q05 = 0.0;
  double q95 = 0.0;
  std::size_t count = 0;
};

Band band(std::vector<double> values);

/// Median and 5%/95% quantiles of per-trace SDR. Traces with undefined SDR
/// are skipped; throws InsufficientDataError if none remain.
Band sdr_summary(std::span<const QueryTrace> traces);

}  // namespace uuaudit
