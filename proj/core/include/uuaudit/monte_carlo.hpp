#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "uuaudit/config.hpp"
#include "uuaudit/evaluation.hpp"
#include "uuaudit/testset.hpp"
#include "uuaudit/trace.hpp"

namespace uuaudit {

/// Per-step metrics tracked across replications.
inline constexpr std::string_view kMcMetrics[] = {"uus", "sdr", "facility_gain",
                                                  "coverage"};

struct McOptions {
  std::size_t n = 1000;       // sample size per replication
  std::size_t budget = 100;
  std::size_t reps = 1000;
  std::uint64_t seed = 0;
  SearchConfig base;          // strategy, budget and seed are overridden
  std::size_t threads = 0;    // 0: hardware concurrency
  bool keep_traces = false;
};

/// Band of one metric for one strategy at every step 1..budget. Steps that
/// no replication reached have count 0 and zero values.
struct McSummary {
  std::string strategy;
  std::string metric;
  std::vector<Band> steps;
  std::size_t reps = 0;
};

struct McAttrition {
  std::string strategy;
  std::size_t failed = 0;       // run threw; no trace recorded
  std::size_t aborted = 0;      // oracle failure mid-run
  std::size_t early_stop = 0;   // ran out of candidates
  std::vector<std::string> errors;
};

struct McResult {
  std::vector<McSummary> summaries;  // strategy-major, metric order as kMcMetrics
  std::vector<std::string> strategies;
  std::vector<Band> final_sdr;       // one per strategy; count 0 if undefined
  std::vector<McAttrition> attrition;
  // traces[s][r], only with keep_traces; failed runs leave an empty trace.
  std::vector<std::vector<QueryTrace>> traces;
  McOptions options;

  const McSummary& summary(std::string_view strategy, std::string_view metric) const;
};

/// Replication r samples n points with seed + r and runs every strategy on
/// that sample, each with its own simulated oracle and search seed seed + r.
/// Per-run errors are counted as attrition. Throws DimensionError when n is
/// out of range and ConfigError when reps is 0 or truth is incomplete.
McResult monte_carlo(const AuditData& data, std::span<const Strategy> strategies,
                     const McOptions& opts);

/// Tidy CSV: step,strategy,metric,median,q05,q95,reps.
void write_mc_csv(std::ostream& out, const McResult& result);
nlohmann::ordered_json to_json(const McResult& result);
/// Inverse of to_json (traces are not part of the report). Throws
/// SchemaError on malformed input.
McResult mc_result_from_json(const nlohmann::json& j);
/// Whitespace-separated columns for one metric: step then median/q05/q95 per
/// strategy, with a commented header line.
void write_gnuplot(std::ostream& out, const McResult& result,
                   std::string_view metric);

}  // namespace uuaudit
