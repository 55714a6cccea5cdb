#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "uuaudit/search_state.hpp"
#include "uuaudit/testset.hpp"

namespace uuaudit {

/// 1 - c: the misclassification rate a calibrated classifier implies.
double prior_phi(double c);

struct LogisticOptions {
  double ridge = 1e-4;
  double tolerance = 1e-8;  // max absolute coefficient change
  int max_iterations = 100;
  bool intercept = false;   // append a free intercept column
};

/// Result of a ridge-damped IRLS fit of P(y = 1) = logistic(X beta).
struct LogisticFit {
  Eigen::VectorXd coefficients;
  Eigen::VectorXd standard_errors;  // from the damped Hessian at the optimum
  int iterations = 0;
  bool converged = false;
  // In-sample classes are perfectly split by sign(X beta); the ridge term is
  // what keeps the coefficients finite.
  bool separated = false;
  // Penalised log-likelihood after each iteration (index 0 = start).
  std::vector<double> objective_trace;
};

/// Newton-Raphson / IRLS with step halving, maximising
/// sum_i [y_i eta_i - log(1 + e^eta_i)] - ridge/2 * |beta|^2.
LogisticFit fit_logistic_irls(const Eigen::MatrixXd& design,
                              const Eigen::VectorXd& outcomes,
                              const LogisticOptions& options = {});

/// Penalised log-likelihood used by fit_logistic_irls.
double penalized_log_likelihood(const Eigen::MatrixXd& design,
                                const Eigen::VectorXd& outcomes,
                                const Eigen::VectorXd& beta, double ridge);

/// Cluster structure over [features, confidence], fixed for a whole search.
struct ClusterGeometry {
  std::size_t k = 0;
  std::vector<std::size_t> assignment;         // by point position
  std::vector<std::vector<double>> centroids;  // k x (p + 1)
  std::unordered_map<std::string, std::size_t> by_id;
};

/// Lloyd's k-means with k-means++ seeding. Throws DimensionError unless
/// 1 <= k <= n.
ClusterGeometry kmeans_clusters(const TestSet& ts, std::size_t k,
                                std::uint64_t seed, int iterations = 50);

struct ClusterStat {
  std::size_t queried = 0;
  std::size_t uus = 0;
};

enum class PhiKind { prior, logistic, cluster_rates };

const char* to_string(PhiKind kind);

/// Estimator of phi(x) = P(point x is an unknown unknown | labels so far).
class PhiModel {
 public:
  static PhiModel prior();
  static PhiModel logistic(LogisticFit fit, bool intercept);
  static PhiModel cluster_rates(std::shared_ptr<const ClusterGeometry> geometry,
                                std::vector<ClusterStat> stats);

  PhiKind kind() const { return kind_; }

  /// Always in [0, 1]. Throws DimensionError if a logistic model's
  /// coefficient count does not match the point, ConsistencyError if a
  /// cluster model has no assignment for the point id.
  double predict(const TestPoint& point) const;
  /// Position-based variant used by the search loops.
  double predict(const TestSet& ts, std::size_t index) const;

  const LogisticFit* logistic_fit() const {
    return kind_ == PhiKind::logistic ? &fit_ : nullptr;
  }
  bool intercept() const { return intercept_; }
  const ClusterGeometry* clusters() const { return geometry_.get(); }
  const std::vector<ClusterStat>& cluster_stats() const { return stats_; }

  /// Smoothed UU rate of cluster j, or nullopt while it has no queries.
  std::optional<double> cluster_rate(std::size_t j) const;

 private:
  double predict_linear(double confidence, const std::vector<double>& x) const;
  double predict_cluster(std::size_t cluster, double confidence) const;

  PhiKind kind_ = PhiKind::prior;
  LogisticFit fit_;
  bool intercept_ = false;
  std::shared_ptr<const ClusterGeometry> geometry_;
  std::vector<ClusterStat> stats_;
};

/// Same as model.predict(point).
double predict_phi(const PhiModel& model, const TestPoint& point);

/// Logistic phi on design columns [confidence, features] (no intercept
/// unless requested) fitted to the UU indicator of every queried point.
/// Returns nullopt until at least one UU and one non-UU have been observed;
/// callers fall back to prior_phi.
std::optional<PhiModel> fit_logistic(const TestSet& ts, const SearchState& state,
                                     const LogisticOptions& options = {});

/// Per-cluster UU counts for the queried points of `state`.
PhiModel cluster_rates_model(std::shared_ptr<const ClusterGeometry> geometry,
                             const SearchState& state);

/// k-means geometry followed by the per-cluster rate estimate:
/// (uus + 1) / (queried + 2), or prior_phi(c) in clusters with no queries.
PhiModel fit_cluster_rates(const TestSet& ts, const SearchState& state,
                           std::size_t k, std::uint64_t seed);

}  // namespace uuaudit
