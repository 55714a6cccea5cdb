#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>

#include "uuaudit/config.hpp"
#include "uuaudit/distance.hpp"
#include "uuaudit/oracle.hpp"
#include "uuaudit/phi.hpp"
#include "uuaudit/search_state.hpp"
#include "uuaudit/testset.hpp"
#include "uuaudit/trace.hpp"

namespace uuaudit {

/// A point chosen for labelling together with the scores that chose it.
struct Selection {
  std::size_t index = 0;
  double phi = 0.0;
  double gain = 0.0;
};

class SelectionPolicy;

/// One facility-locations step: the unqueried point (confidence >= tau too,
/// with restrict_candidates) with the largest fl_gain under `phi`, ties to
/// the lower id. nullopt when nothing is eligible.
std::optional<Selection> select_facility(const TestSet& ts,
                                         const PairwiseDistances& dist,
                                         const SearchState& state,
                                         const PhiModel& phi,
                                         const SearchConfig& cfg);

/// Step-driven search: next() proposes a point, answer() applies the oracle's
/// label. run_search() and the interactive service both drive this class, so
/// offline and online runs make identical decisions.
///
/// The TestSet must outlive the run.
class SearchRun {
 public:
  /// Validates cfg against ts (ConfigError) before anything else.
  SearchRun(const TestSet& ts, SearchConfig cfg);
  ~SearchRun();
  SearchRun(SearchRun&&) noexcept;
  SearchRun& operator=(SearchRun&&) = delete;

  /// Pending selection, computed on first call and stable until answered.
  /// nullopt once the budget is spent or no eligible candidate remains.
  const std::optional<Selection>& next();

  /// Applies the label for the pending point and returns the recorded step.
  /// Throws ReuseError when nothing is pending.
  const TraceStep& answer(std::string label);

  /// Marks the run as aborted (e.g. the oracle failed).
  void abort(std::string reason);

  bool finished();
  const TestSet& testset() const { return ts_; }
  const SearchConfig& config() const { return trace_.config; }
  const SearchState& state() const { return state_; }
  const PhiModel& phi_model() const { return phi_; }
  const QueryTrace& trace() const { return trace_; }
  const PairwiseDistances& distances() const { return dist_; }

 private:
  void refresh_phi();

  const TestSet& ts_;
  PairwiseDistances dist_;
  SearchState state_;
  QueryTrace trace_;
  EstimatorChoice estimator_;
  std::shared_ptr<const ClusterGeometry> clusters_;
  PhiModel phi_;
  std::unique_ptr<SelectionPolicy> policy_;
  std::optional<Selection> pending_;
  bool pending_valid_ = false;
  bool stopped_ = false;
};

/// Runs cfg.strategy to completion against the oracle. An oracle failure
/// yields a partial trace with `aborted` set rather than an exception.
QueryTrace run_search(const TestSet& ts, Oracle& oracle, const SearchConfig& cfg);

/// Greedy facility-locations search: each step queries the unqueried point
/// with the largest expected gain in W.
QueryTrace greedy_fl_search(const TestSet& ts, Oracle& oracle, SearchConfig cfg);
/// Candidates with confidence >= tau in ascending confidence.
QueryTrace most_uncertain_search(const TestSet& ts, Oracle& oracle,
                                 SearchConfig cfg);
/// Greedy on the expected coverage-utility increase.
QueryTrace coverage_greedy_search(const TestSet& ts, Oracle& oracle,
                                  SearchConfig cfg);
/// UCB1 over k-means clusters, uniform draw inside the chosen cluster.
QueryTrace bandit_search(const TestSet& ts, Oracle& oracle, SearchConfig cfg);

}  // namespace uuaudit
