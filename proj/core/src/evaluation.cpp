#include "uuaudit/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "uuaudit/distance.hpp"
#include "uuaudit/errors.hpp"
#include "uuaudit/utility.hpp"

namespace uuaudit {

std::optional<double> sdr(std::span<const TraceStep> steps) {
  if (steps.empty()) return std::nullopt;
  double expected = 0.0;
  std::size_t found = 0;
  for (const TraceStep& s : steps) {
    expected += 1.0 - s.confidence;
    if (s.is_uu) ++found;
  }
  if (!(expected > 0.0)) return std::nullopt;
  return static_cast<double>(found) / expected;
}

std::optional<double> sdr(const QueryTrace& trace) { return sdr(trace.steps); }

namespace {

// Brute-force nearest distance from every point to the UUs of a prefix.
std::vector<double> prefix_utilities(const TestSet& ts, const QueryTrace& trace,
                                     UtilityKind which, bool as_gain) {
  const double cap = diameter(ts);
  std::vector<std::size_t> uus;
  double rewards = 0.0;
  std::vector<double> out;
  out.reserve(trace.steps.size());
  for (const TraceStep& step : trace.steps) {
    const std::size_t idx = ts.index_of(step.id);
    if (step.is_uu) {
      uus.push_back(idx);
      rewards += reward(ts.confidence(idx));
    }
    if (uus.empty()) {
      out.push_back(which == UtilityKind::facility ? (as_gain ? 0.0 : -cap) : 0.0);
      continue;
    }
    double acc = 0.0;
    for (std::size_t x = 0; x < ts.size(); ++x) {
      double m = std::numeric_limits<double>::infinity();
      for (std::size_t q : uus) m = std::min(m, point_distance(ts, x, q));
      acc += which == UtilityKind::facility ? m : ts.confidence(x) * std::exp(-m);
    }
    if (which == UtilityKind::coverage) {
      out.push_back(acc);
    } else {
      const double w = rewards - acc / static_cast<double>(ts.size());
      out.push_back(as_gain ? w + cap : w);
    }
  }
  return out;
}

}  // namespace

std::vector<double> utility_trajectory(const TestSet& ts, const QueryTrace& trace,
                                       UtilityKind which) {
  return prefix_utilities(ts, trace, which, /*as_gain=*/true);
}

std::vector<double> facility_utility_series(const TestSet& ts,
                                            const QueryTrace& trace) {
  return prefix_utilities(ts, trace, UtilityKind::facility, /*as_gain=*/false);
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw InsufficientDataError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile level outside [0,1]");
  std::sort(values.begin(), values.end());
  const double h = static_cast<double>(values.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Band band(std::vector<double> values) {
  Band b;
  b.count = values.size();
  b.median = quantile(values, 0.5);
  b.q05 = quantile(values, 0.05);
  b.q95 = quantile(std::move(values), 0.95);
  return b;
}

Band sdr_summary(std::span<const QueryTrace> traces) {
  std::vector<double> values;
  for (const QueryTrace& t : traces) {
    if (auto v = sdr(t)) values.push_back(*v);
  }
  if (values.empty()) throw InsufficientDataError("no trace has a defined SDR");
  return band(std::move(values));
}

}  // namespace uuaudit
