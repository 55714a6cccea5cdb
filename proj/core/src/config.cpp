#include "uuaudit/config.hpp"

#include <cmath>

#include "uuaudit/errors.hpp"
#include "uuaudit/testset.hpp"

namespace uuaudit {

std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::facility_locations: return "fl";
    case Strategy::most_uncertain: return "mu";
    case Strategy::coverage: return "cov";
    case Strategy::bandit: return "bandit";
  }
  return "unknown";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "fl" || name == "facility_locations") {
    return Strategy::facility_locations;
  }
  if (name == "mu" || name == "most_uncertain") return Strategy::most_uncertain;
  if (name == "cov" || name == "coverage") return Strategy::coverage;
  if (name == "bandit") return Strategy::bandit;
  throw ConfigError("unknown strategy '" + std::string(name) +
                    "' (expected fl, mu, cov or bandit)");
}

std::string_view estimator_name(EstimatorChoice e) {
  switch (e) {
    case EstimatorChoice::automatic: return "auto";
    case EstimatorChoice::prior: return "prior";
    case EstimatorChoice::logistic: return "logistic";
    case EstimatorChoice::cluster_rates: return "cluster";
  }
  return "unknown";
}

EstimatorChoice parse_estimator(std::string_view name) {
  if (name == "auto") return EstimatorChoice::automatic;
  if (name == "prior") return EstimatorChoice::prior;
  if (name == "logistic") return EstimatorChoice::logistic;
  if (name == "cluster" || name == "cluster_rates") {
    return EstimatorChoice::cluster_rates;
  }
  throw ConfigError("unknown estimator '" + std::string(name) +
                    "' (expected auto, prior, logistic or cluster)");
}

EstimatorChoice SearchConfig::resolved_estimator() const {
  if (estimator != EstimatorChoice::automatic) return estimator;
  switch (strategy) {
    case Strategy::facility_locations: return EstimatorChoice::logistic;
    case Strategy::most_uncertain: return EstimatorChoice::prior;
    case Strategy::coverage:
    case Strategy::bandit: return EstimatorChoice::cluster_rates;
  }
  return EstimatorChoice::prior;
}

void SearchConfig::validate(const TestSet& ts) const {
  if (budget == 0) throw ConfigError("budget must be positive");
  if (budget > ts.size()) {
    throw ConfigError("budget " + std::to_string(budget) +
                      " exceeds the " + std::to_string(ts.size()) +
                      " available candidates");
  }
  if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("tau must lie in [0,1]");
  const bool needs_clusters = strategy == Strategy::coverage ||
                              strategy == Strategy::bandit ||
                              resolved_estimator() == EstimatorChoice::cluster_rates;
  if (needs_clusters && (clusters == 0 || clusters > ts.size())) {
    throw ConfigError("cluster count " + std::to_string(clusters) +
                      " outside [1, " + std::to_string(ts.size()) + "]");
  }
  if (!(exploration >= 0.0) || !std::isfinite(exploration)) {
    throw ConfigError("exploration weight must be a nonnegative number");
  }
}

nlohmann::ordered_json to_json(const SearchConfig& cfg) {
  nlohmann::ordered_json j;
  j["strategy"] = std::string(strategy_name(cfg.strategy));
  j["budget"] = cfg.budget;
  j["tau"] = cfg.tau;
  j["seed"] = cfg.seed;
  j["estimator"] = std::string(estimator_name(cfg.estimator));
  j["clusters"] = cfg.clusters;
  j["exploration"] = cfg.exploration;
  j["restrict_candidates"] = cfg.restrict_candidates;
  j["allow_below_tau"] = cfg.allow_below_tau;
  j["logistic_intercept"] = cfg.logistic_intercept;
  return j;
}

SearchConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  SearchConfig cfg;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "strategy") {
        cfg.strategy = parse_strategy(value.get<std::string>());
      } else if (key == "budget") {
        if (!value.is_number_integer() || value.get<long long>() < 0) {
          throw ConfigError("budget must be a nonnegative integer");
        }
        cfg.budget = value.get<std::size_t>();
      } else if (key == "tau") {
        cfg.tau = value.get<double>();
      } else if (key == "seed") {
        cfg.seed = value.get<std::uint64_t>();
      } else if (key == "estimator") {
        cfg.estimator = parse_estimator(value.get<std::string>());
      } else if (key == "clusters") {
        cfg.clusters = value.get<std::size_t>();
      } else if (key == "exploration") {
        cfg.exploration = value.get<double>();
      } else if (key == "restrict_candidates") {
        cfg.restrict_candidates = value.get<bool>();
      } else if (key == "allow_below_tau") {
        cfg.allow_below_tau = value.get<bool>();
      } else if (key == "logistic_intercept") {
        cfg.logistic_intercept = value.get<bool>();
      } else {
        throw ConfigError("unknown config field '" + key + "'");
      }
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("config field '" + key + "' has the wrong type");
    }
  }
  return cfg;
}

}  // namespace uuaudit
