#include "uuaudit/search.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "uuaudit/errors.hpp"
#include "uuaudit/rng.hpp"
#include "uuaudit/utility.hpp"

namespace uuaudit {

class SelectionPolicy {
 public:
  virtual ~SelectionPolicy() = default;
  virtual std::optional<Selection> select(const SearchRun& run) = 0;
  virtual void observe(std::size_t /*index*/, bool /*is_uu*/) {}
};

namespace {

// Larger score wins; equal scores go to the lower id.
struct Best {
  std::optional<Selection> sel;
  std::size_t rank = 0;

  void offer(const TestSet& ts, std::size_t i, double phi, double gain) {
    const std::size_t r = ts.id_rank(i);
    if (!sel || gain > sel->gain || (gain == sel->gain && r < rank)) {
      sel = Selection{i, phi, gain};
      rank = r;
    }
  }
};

class FacilityPolicy final : public SelectionPolicy {
 public:
  std::optional<Selection> select(const SearchRun& run) override {
    return select_facility(run.testset(), run.distances(), run.state(),
                           run.phi_model(), run.config());
  }
};

class MostUncertainPolicy final : public SelectionPolicy {
 public:
  explicit MostUncertainPolicy(const SearchRun& run) {
    const TestSet& ts = run.testset();
    const SearchConfig& cfg = run.config();
    std::vector<std::size_t> above;
    std::vector<std::size_t> below;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      (ts.confidence(i) >= cfg.tau ? above : below).push_back(i);
    }
    std::sort(above.begin(), above.end(), [&](std::size_t a, std::size_t b) {
      if (ts.confidence(a) != ts.confidence(b)) {
        return ts.confidence(a) < ts.confidence(b);
      }
      return ts.id_rank(a) < ts.id_rank(b);
    });
    order_ = std::move(above);
    if (cfg.allow_below_tau) {
      // Below the threshold, walk downward from tau.
      std::sort(below.begin(), below.end(), [&](std::size_t a, std::size_t b) {
        if (ts.confidence(a) != ts.confidence(b)) {
          return ts.confidence(a) > ts.confidence(b);
        }
        return ts.id_rank(a) < ts.id_rank(b);
      });
      order_.insert(order_.end(), below.begin(), below.end());
    }
  }

  std::optional<Selection> select(const SearchRun& run) override {
    while (cursor_ < order_.size() && run.state().is_queried(order_[cursor_])) {
      ++cursor_;
    }
    if (cursor_ == order_.size()) return std::nullopt;
    const std::size_t i = order_[cursor_];
    const TestSet& ts = run.testset();
    return Selection{i, run.phi_model().predict(ts, i), 1.0 - ts.confidence(i)};
  }

 private:
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

class CoveragePolicy final : public SelectionPolicy {
 public:
  explicit CoveragePolicy(const SearchRun& run) : n_(run.testset().size()) {
    const auto& dist = run.distances();
    sim_.resize(n_ * n_);
    for (std::size_t a = 0; a < n_; ++a) {
      const auto row = dist.row(a);
      for (std::size_t b = 0; b < n_; ++b) sim_[a * n_ + b] = std::exp(-row[b]);
    }
    best_sim_.resize(n_);
  }

  std::optional<Selection> select(const SearchRun& run) override {
    const TestSet& ts = run.testset();
    const SearchConfig& cfg = run.config();
    detail::best_similarity(run.state(), best_sim_);
    Best best;
    scan(run, best, [&](std::size_t i) { return ts.confidence(i) >= cfg.tau; });
    if (!best.sel && cfg.allow_below_tau) {
      scan(run, best, [](std::size_t) { return true; });
    }
    return best.sel;
  }

 private:
  template <class Eligible>
  void scan(const SearchRun& run, Best& best, Eligible eligible) {
    const TestSet& ts = run.testset();
    for (std::size_t i = 0; i < n_; ++i) {
      if (run.state().is_queried(i) || !eligible(i)) continue;
      const double phi = run.phi_model().predict(ts, i);
      const std::span<const double> sim(sim_.data() + i * n_, n_);
      best.offer(ts, i, phi, detail::coverage_gain_row(ts, best_sim_, phi, sim));
    }
  }

  std::size_t n_;
  std::vector<double> sim_;
  std::vector<double> best_sim_;
};

class BanditPolicy final : public SelectionPolicy {
 public:
  BanditPolicy(const SearchRun& run, const ClusterGeometry& geometry)
      : assignment_(geometry.assignment),
        arms_(geometry.k),
        rng_(run.config().seed ^ 0x9e3779b97f4a7c15ULL) {
    fill(run, /*above_tau=*/true);
  }

  std::optional<Selection> select(const SearchRun& run) override {
    auto arm = choose_arm();
    if (!arm && run.config().allow_below_tau && !refilled_) {
      refilled_ = true;
      fill(run, /*above_tau=*/false);
      arm = choose_arm();
    }
    if (!arm) return std::nullopt;
    Arm& a = arms_[arm->first];
    const std::size_t pos = static_cast<std::size_t>(rng_.below(a.pool.size()));
    const std::size_t i = a.pool[pos];
    a.pool.erase(a.pool.begin() + static_cast<std::ptrdiff_t>(pos));
    return Selection{i, run.phi_model().predict(run.testset(), i), arm->second};
  }

  void observe(std::size_t index, bool is_uu) override {
    Arm& a = arms_[assignment_[index]];
    ++a.pulls;
    if (is_uu) ++a.uus;
    ++total_pulls_;
  }

 private:
  struct Arm {
    std::vector<std::size_t> pool;  // unqueried eligible points, ascending
    std::size_t pulls = 0;
    std::size_t uus = 0;
  };

  void fill(const SearchRun& run, bool above_tau) {
    const TestSet& ts = run.testset();
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (run.state().is_queried(i)) continue;
      if ((ts.confidence(i) >= run.config().tau) != above_tau) continue;
      arms_[assignment_[i]].pool.push_back(i);
    }
    exploration_ = run.config().exploration;
  }

  // Index of the arm to pull and its UCB score (0 during burn-in).
  std::optional<std::pair<std::size_t, double>> choose_arm() const {
    for (std::size_t j = 0; j < arms_.size(); ++j) {
      if (!arms_[j].pool.empty() && arms_[j].pulls == 0) {
        return std::make_pair(j, 0.0);
      }
    }
    std::optional<std::pair<std::size_t, double>> best;
    const double log_total = std::log(static_cast<double>(total_pulls_));
    for (std::size_t j = 0; j < arms_.size(); ++j) {
      const Arm& a = arms_[j];
      if (a.pool.empty()) continue;  // retired
      const double pulls = static_cast<double>(a.pulls);
      const double score = static_cast<double>(a.uus) / pulls +
                           exploration_ * std::sqrt(2.0 * log_total / pulls);
      if (!best || score > best->second) best = std::make_pair(j, score);
    }
    return best;
  }

  std::vector<std::size_t> assignment_;
  std::vector<Arm> arms_;
  Rng rng_;
  std::size_t total_pulls_ = 0;
  double exploration_ = 1.0;
  bool refilled_ = false;
};

}  // namespace

std::optional<Selection> select_facility(const TestSet& ts,
                                         const PairwiseDistances& dist,
                                         const SearchState& state,
                                         const PhiModel& phi,
                                         const SearchConfig& cfg) {
  Best best;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (state.is_queried(i)) continue;
    if (cfg.restrict_candidates && ts.confidence(i) < cfg.tau) continue;
    const double p = phi.predict(ts, i);
    best.offer(ts, i, p, detail::fl_gain_row(state, ts.confidence(i), p, dist.row(i)));
  }
  return best.sel;
}

SearchRun::SearchRun(const TestSet& ts, SearchConfig cfg)
    : ts_(ts),
      dist_((cfg.validate(ts), ts)),
      state_(ts, dist_.diameter(), cfg.budget),
      estimator_(cfg.resolved_estimator()) {
  trace_.strategy = cfg.strategy;
  trace_.config = cfg;
  const bool needs_clusters = cfg.strategy == Strategy::coverage ||
                              cfg.strategy == Strategy::bandit ||
                              estimator_ == EstimatorChoice::cluster_rates;
  if (needs_clusters) {
    clusters_ = std::make_shared<const ClusterGeometry>(
        kmeans_clusters(ts, cfg.clusters, cfg.seed));
  }
  refresh_phi();
  switch (cfg.strategy) {
    case Strategy::facility_locations:
      policy_ = std::make_unique<FacilityPolicy>();
      break;
    case Strategy::most_uncertain:
      policy_ = std::make_unique<MostUncertainPolicy>(*this);
      break;
    case Strategy::coverage:
      policy_ = std::make_unique<CoveragePolicy>(*this);
      break;
    case Strategy::bandit:
      policy_ = std::make_unique<BanditPolicy>(*this, *clusters_);
      break;
  }
}

SearchRun::~SearchRun() = default;
SearchRun::SearchRun(SearchRun&&) noexcept = default;

void SearchRun::refresh_phi() {
  switch (estimator_) {
    case EstimatorChoice::automatic:
    case EstimatorChoice::prior:
      phi_ = PhiModel::prior();
      break;
    case EstimatorChoice::logistic: {
      LogisticOptions opts;
      opts.intercept = trace_.config.logistic_intercept;
      auto fitted = fit_logistic(ts_, state_, opts);
      phi_ = fitted ? std::move(*fitted) : PhiModel::prior();
      break;
    }
    case EstimatorChoice::cluster_rates:
      phi_ = cluster_rates_model(clusters_, state_);
      break;
  }
}

const std::optional<Selection>& SearchRun::next() {
  if (!pending_valid_) {
    pending_.reset();
    if (!stopped_ && state_.queried().size() < state_.budget()) {
      pending_ = policy_->select(*this);
      if (!pending_) {
        trace_.early_stop = true;
        stopped_ = true;
      }
    }
    pending_valid_ = true;
  }
  return pending_;
}

bool SearchRun::finished() { return !next().has_value(); }

const TraceStep& SearchRun::answer(std::string label) {
  next();
  if (!pending_) throw ReuseError("no query is pending");
  const Selection sel = *pending_;
  const bool uu = state_.record(ts_, dist_, sel.index, label);
  policy_->observe(sel.index, uu);

  TraceStep step;
  step.b = state_.queried().size();
  step.id = ts_[sel.index].id;
  step.confidence = ts_.confidence(sel.index);
  step.phi = sel.phi;
  step.label = std::move(label);
  step.is_uu = uu;
  step.utility = facility_utility(ts_, state_).total;
  step.gain = sel.gain;
  trace_.steps.push_back(std::move(step));

  pending_.reset();
  pending_valid_ = false;
  refresh_phi();
  return trace_.steps.back();
}

void SearchRun::abort(std::string reason) {
  trace_.aborted = true;
  trace_.note = std::move(reason);
  stopped_ = true;
  pending_.reset();
  pending_valid_ = true;
}

QueryTrace run_search(const TestSet& ts, Oracle& oracle, const SearchConfig& cfg) {
  SearchRun run(ts, cfg);
  while (const auto& sel = run.next()) {
    std::string label;
    try {
      label = oracle.query(ts[sel->index].id);
    } catch (const std::exception& e) {
      run.abort(e.what());
      break;
    }
    run.answer(std::move(label));
  }
  return run.trace();
}

QueryTrace greedy_fl_search(const TestSet& ts, Oracle& oracle, SearchConfig cfg) {
  cfg.strategy = Strategy::facility_locations;
  return run_search(ts, oracle, cfg);
}

QueryTrace most_uncertain_search(const TestSet& ts, Oracle& oracle,
                                 SearchConfig cfg) {
  cfg.strategy = Strategy::most_uncertain;
  return run_search(ts, oracle, cfg);
}

QueryTrace coverage_greedy_search(const TestSet& ts, Oracle& oracle,
                                  SearchConfig cfg) {
  cfg.strategy = Strategy::coverage;
  return run_search(ts, oracle, cfg);
}

QueryTrace bandit_search(const TestSet& ts, Oracle& oracle, SearchConfig cfg) {
  cfg.strategy = Strategy::bandit;
  return run_search(ts, oracle, cfg);
}

}  // namespace uuaudit
