#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

namespace uuaudit {

class TestSet;

enum class Strategy { facility_locations, most_uncertain, coverage, bandit };

/// Short CLI names: fl, mu, cov, bandit.
std::string_view strategy_name(Strategy s);
/// Accepts the short names and the long enum spellings.
Strategy parse_strategy(std::string_view name);

/// Which phi estimator drives the search. `automatic` picks each strategy's
/// own pairing: logistic for fl, prior for mu, cluster rates for cov/bandit.
enum class EstimatorChoice { automatic, prior, logistic, cluster_rates };

std::string_view estimator_name(EstimatorChoice e);
EstimatorChoice parse_estimator(std::string_view name);

struct SearchConfig {
  Strategy strategy = Strategy::facility_locations;
  std::size_t budget = 100;
  double tau = 0.65;  // candidate floor for the baselines
  std::uint64_t seed = 0;
  EstimatorChoice estimator = EstimatorChoice::automatic;
  std::size_t clusters = 10;
  double exploration = 1.0;  // multiplier on the UCB1 bonus
  // fl only: also restrict candidates to confidence >= tau.
  bool restrict_candidates = false;
  // Baselines only: keep querying below tau once the eligible pool is empty.
  bool allow_below_tau = false;
  bool logistic_intercept = false;

  /// Throws ConfigError describing the first invalid field.
  void validate(const TestSet& ts) const;

  EstimatorChoice resolved_estimator() const;

  friend bool operator==(const SearchConfig&, const SearchConfig&) = default;
};

nlohmann::ordered_json to_json(const SearchConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
SearchConfig config_from_json(const nlohmann::json& j);

}  // namespace uuaudit
