#include "uuaudit/oracle.hpp"

#include "uuaudit/errors.hpp"

namespace uuaudit {

SimulatedOracle::SimulatedOracle(const AuditData& data) {
  std::string missing;
  std::size_t missing_count = 0;
  for (std::size_t i = 0; i < data.set.size(); ++i) {
    if (data.truth[i]) {
      labels_.emplace(data.set[i].id, *data.truth[i]);
      continue;
    }
    if (missing_count < 10) {
      missing += (missing.empty() ? "" : ", ") + data.set[i].id;
    }
    ++missing_count;
  }
  if (missing_count > 0) {
    throw OracleError(std::to_string(missing_count) +
                      " point(s) lack a true label: " + missing +
                      (missing_count > 10 ? ", ..." : ""));
  }
}

std::string SimulatedOracle::query(std::string_view id) {
  const std::string key(id);
  auto it = labels_.find(key);
  if (it == labels_.end()) throw OracleError("unknown point id '" + key + "'");
  if (!answered_.insert(key).second) {
    throw OracleError("point '" + key + "' was already answered");
  }
  return it->second;
}

SimulatedOracle make_simulated_oracle(const AuditData& data) {
  return SimulatedOracle(data);
}

std::string ScriptedOracle::query(std::string_view id) {
  const std::string key(id);
  auto it = answers_.find(key);
  if (it == answers_.end()) throw OracleError("no scripted answer for '" + key + "'");
  if (!answered_.insert(key).second) {
    throw OracleError("point '" + key + "' was already answered");
  }
  return it->second;
}

}  // namespace uuaudit
