#include "uuaudit/trace.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include "uuaudit/errors.hpp"

namespace uuaudit {

std::size_t QueryTrace::uu_count() const {
  return static_cast<std::size_t>(std::count_if(
      steps.begin(), steps.end(), [](const TraceStep& s) { return s.is_uu; }));
}

nlohmann::ordered_json step_to_json(const TraceStep& step) {
  nlohmann::ordered_json j;
  j["b"] = step.b;
  j["id"] = step.id;
  j["c"] = step.confidence;
  j["phi"] = step.phi;
  j["label"] = step.label;
  j["is_uu"] = step.is_uu;
  j["W"] = step.utility;
  j["gain"] = step.gain;
  return j;
}

TraceStep step_from_json(const nlohmann::json& j) {
  TraceStep s;
  try {
    s.b = j.at("b").get<std::size_t>();
    s.id = j.at("id").get<std::string>();
    s.confidence = j.at("c").get<double>();
    s.phi = j.at("phi").get<double>();
    s.label = j.at("label").get<std::string>();
    s.is_uu = j.at("is_uu").get<bool>();
    s.utility = j.at("W").get<double>();
    s.gain = j.at("gain").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed trace step: ") + e.what());
  }
  return s;
}

void write_trace_jsonl(std::ostream& out, const QueryTrace& trace) {
  for (const TraceStep& step : trace.steps) out << step_to_json(step).dump() << '\n';
}

QueryTrace read_trace_jsonl(std::istream& in) {
  QueryTrace trace;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      trace.steps.push_back(step_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError(std::string("malformed trace line: ") + e.what());
    }
  }
  return trace;
}

nlohmann::ordered_json trace_metadata(const QueryTrace& trace) {
  nlohmann::ordered_json j;
  j["algorithm"] = std::string(strategy_name(trace.strategy));
  j["seed"] = trace.config.seed;
  j["config"] = to_json(trace.config);
  j["steps"] = trace.steps.size();
  j["aborted"] = trace.aborted;
  j["early_stop"] = trace.early_stop;
  j["note"] = trace.note;
  return j;
}

}  // namespace uuaudit
