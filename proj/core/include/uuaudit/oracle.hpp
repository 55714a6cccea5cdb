#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

#include "uuaudit/testset.hpp"

namespace uuaudit {

/// Label source for a search. Each id may be asked at most once.
class Oracle {
 public:
  virtual ~Oracle() = default;
  /// Throws OracleError when no answer can be given.
  virtual std::string query(std::string_view id) = 0;
};

/// Answers from ground truth captured at construction. Later changes to the
/// AuditData it was built from do not affect its answers.
class SimulatedOracle final : public Oracle {
 public:
  /// Throws OracleError naming the points that lack a true label.
  explicit SimulatedOracle(const AuditData& data);

  std::string query(std::string_view id) override;
  const std::unordered_set<std::string>& answered() const { return answered_; }

 private:
  std::unordered_map<std::string, std::string> labels_;
  std::unordered_set<std::string> answered_;
};

SimulatedOracle make_simulated_oracle(const AuditData& data);

/// Answers from an explicit id -> label table; used to replay human answers.
class ScriptedOracle final : public Oracle {
 public:
  explicit ScriptedOracle(std::unordered_map<std::string, std::string> answers)
      : answers_(std::move(answers)) {}

  std::string query(std::string_view id) override;

 private:
  std::unordered_map<std::string, std::string> answers_;
  std::unordered_set<std::string> answered_;
};

}  // namespace uuaudit
