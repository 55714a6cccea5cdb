#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "uuaudit/config.hpp"

namespace uuaudit {

struct TraceStep {
  std::size_t b = 0;  // 1-based step index
  std::string id;
  double confidence = 0.0;
  double phi = 0.0;   // estimate at selection time
  std::string label;  // oracle answer
  bool is_uu = false;
  double utility = 0.0;  // facility-locations W after the step
  double gain = 0.0;     // selection score of the chosen point

  friend bool operator==(const TraceStep&, const TraceStep&) = default;
};

/// Ordered record of one search run.
struct QueryTrace {
  Strategy strategy = Strategy::facility_locations;
  SearchConfig config;
  std::vector<TraceStep> steps;
  bool aborted = false;     // oracle failed mid-run
  bool early_stop = false;  // ran out of eligible candidates before budget
  std::string note;

  std::size_t uu_count() const;

  friend bool operator==(const QueryTrace&, const QueryTrace&) = default;
};

nlohmann::ordered_json step_to_json(const TraceStep& step);
TraceStep step_from_json(const nlohmann::json& j);

/// One JSON object per step with keys b, id, c, phi, label, is_uu, W, gain.
void write_trace_jsonl(std::ostream& out, const QueryTrace& trace);
/// Reads steps only; strategy and config stay at their defaults.
QueryTrace read_trace_jsonl(std::istream& in);

/// Strategy, config, seed and termination flags (the trace's sidecar).
nlohmann::ordered_json trace_metadata(const QueryTrace& trace);

}  // namespace uuaudit
