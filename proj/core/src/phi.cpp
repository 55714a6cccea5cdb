#include "uuaudit/phi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "uuaudit/errors.hpp"
#include "uuaudit/rng.hpp"

namespace uuaudit {
namespace {

double sigmoid(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

double softplus(double eta) {
  return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

}  // namespace

double prior_phi(double c) {
  if (!(c >= 0.0 && c <= 1.0)) {
    throw DomainError("confidence " + std::to_string(c) + " outside [0,1]");
  }
  return 1.0 - c;
}

const char* to_string(PhiKind kind) {
  switch (kind) {
    case PhiKind::prior: return "prior";
    case PhiKind::logistic: return "logistic";
    case PhiKind::cluster_rates: return "cluster_rates";
  }
  return "unknown";
}

double penalized_log_likelihood(const Eigen::MatrixXd& design,
                                const Eigen::VectorXd& outcomes,
                                const Eigen::VectorXd& beta, double ridge) {
  const Eigen::VectorXd eta = design * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    ll += outcomes(i) * eta(i) - softplus(eta(i));
  }
  return ll - 0.5 * ridge * beta.squaredNorm();
}

LogisticFit fit_logistic_irls(const Eigen::MatrixXd& design,
                              const Eigen::VectorXd& outcomes,
                              const LogisticOptions& options) {
  if (design.rows() != outcomes.size()) {
    throw DimensionError("design has " + std::to_string(design.rows()) +
                         " rows but " + std::to_string(outcomes.size()) +
                         " outcomes");
  }
  const Eigen::Index d = design.cols();
  const Eigen::MatrixXd ridge_eye =
      options.ridge * Eigen::MatrixXd::Identity(d, d);

  auto hessian = [&](const Eigen::VectorXd& beta) {
    const Eigen::VectorXd eta = design * beta;
    Eigen::VectorXd w(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      const double p = sigmoid(eta(i));
      w(i) = p * (1.0 - p);
    }
    return Eigen::MatrixXd(design.transpose() * w.asDiagonal() * design +
                           ridge_eye);
  };

  LogisticFit fit;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
  double objective = penalized_log_likelihood(design, outcomes, beta, options.ridge);
  fit.objective_trace.push_back(objective);

  for (int it = 1; it <= options.max_iterations; ++it) {
    const Eigen::VectorXd eta = design * beta;
    Eigen::VectorXd resid(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      resid(i) = outcomes(i) - sigmoid(eta(i));
    }
    const Eigen::VectorXd grad =
        design.transpose() * resid - options.ridge * beta;
    const Eigen::VectorXd step = hessian(beta).ldlt().solve(grad);
    fit.iterations = it;

    if (step.cwiseAbs().maxCoeff() < options.tolerance) {
      beta += step;
      objective = penalized_log_likelihood(design, outcomes, beta, options.ridge);
      fit.objective_trace.push_back(objective);
      fit.converged = true;
      break;
    }

    // Step halving keeps the objective monotone.
    double scale = 1.0;
    bool accepted = false;
    while (scale > 1e-12) {
      const Eigen::VectorXd trial = beta + scale * step;
      const double value =
          penalized_log_likelihood(design, outcomes, trial, options.ridge);
      if (value >= objective) {
        beta = trial;
        objective = value;
        accepted = true;
        break;
      }
      scale *= 0.5;
    }
    if (!accepted) {
      // Numerically at the optimum: no representable ascent step remains.
      fit.converged = true;
      break;
    }
    fit.objective_trace.push_back(objective);
    if ((scale * step).cwiseAbs().maxCoeff() < options.tolerance) {
      fit.converged = true;
      break;
    }
  }

  const Eigen::MatrixXd cov = hessian(beta).ldlt().solve(
      Eigen::MatrixXd::Identity(d, d));
  fit.standard_errors = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  fit.coefficients = std::move(beta);

  const Eigen::VectorXd eta = design * fit.coefficients;
  fit.separated = true;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    if ((eta(i) > 0.0) != (outcomes(i) > 0.5)) {
      fit.separated = false;
      break;
    }
  }
  return fit;
}

ClusterGeometry kmeans_clusters(const TestSet& ts, std::size_t k,
                                std::uint64_t seed, int iterations) {
  const std::size_t n = ts.size();
  if (k < 1 || k > n) {
    throw DimensionError("cluster count " + std::to_string(k) +
                         " outside [1, " + std::to_string(n) + "]");
  }
  const std::size_t dim = ts.dim() + 1;
  auto coord = [&](std::size_t i, std::size_t j) {
    return j < ts.dim() ? ts.features(i)[j] : ts.confidence(i);
  };
  auto sq_dist = [&](std::size_t i, const std::vector<double>& c) {
    double acc = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      const double diff = coord(i, j) - c[j];
      acc += diff * diff;
    }
    return acc;
  };
  auto point = [&](std::size_t i) {
    std::vector<double> v(dim);
    for (std::size_t j = 0; j < dim; ++j) v[j] = coord(i, j);
    return v;
  };

  ClusterGeometry geo;
  geo.k = k;
  Rng rng(seed);

  // k-means++ seeding.
  geo.centroids.push_back(point(rng.below(n)));
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  while (geo.centroids.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], sq_dist(i, geo.centroids.back()));
      total += d2[i];
    }
    std::size_t pick = n - 1;
    if (total > 0.0) {
      const double target = rng.unit() * total;
      double cum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        cum += d2[i];
        if (cum > target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.below(n);
    }
    geo.centroids.push_back(point(pick));
  }

  geo.assignment.assign(n, 0);
  for (int it = 0; it < iterations; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = sq_dist(i, geo.centroids[0]);
      for (std::size_t c = 1; c < k; ++c) {
        const double dc = sq_dist(i, geo.centroids[c]);
        if (dc < best_d) {
          best_d = dc;
          best = c;
        }
      }
      if (best != geo.assignment[i]) changed = true;
      geo.assignment[i] = best;
    }
    if (!changed) break;
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = geo.assignment[i];
      ++counts[c];
      for (std::size_t j = 0; j < dim; ++j) sums[c][j] += coord(i, j);
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // empty cluster keeps its centroid
      for (std::size_t j = 0; j < dim; ++j) {
        geo.centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
      }
    }
  }

  geo.by_id.reserve(n);
  for (std::size_t i = 0; i < n; ++i) geo.by_id.emplace(ts[i].id, geo.assignment[i]);
  return geo;
}

PhiModel PhiModel::prior() { return PhiModel{}; }

PhiModel PhiModel::logistic(LogisticFit fit, bool intercept) {
  PhiModel m;
  m.kind_ = PhiKind::logistic;
  m.fit_ = std::move(fit);
  m.intercept_ = intercept;
  return m;
}

PhiModel PhiModel::cluster_rates(std::shared_ptr<const ClusterGeometry> geometry,
                                 std::vector<ClusterStat> stats) {
  if (!geometry || stats.size() != geometry->k) {
    throw DimensionError("cluster statistics do not match the geometry");
  }
  PhiModel m;
  m.kind_ = PhiKind::cluster_rates;
  m.geometry_ = std::move(geometry);
  m.stats_ = std::move(stats);
  return m;
}

std::optional<double> PhiModel::cluster_rate(std::size_t j) const {
  const ClusterStat& s = stats_.at(j);
  if (s.queried == 0) return std::nullopt;
  return (static_cast<double>(s.uus) + 1.0) /
         (static_cast<double>(s.queried) + 2.0);
}

double PhiModel::predict_linear(double confidence,
                                const std::vector<double>& x) const {
  const Eigen::VectorXd& b = fit_.coefficients;
  const std::size_t expected = x.size() + 1 + (intercept_ ? 1 : 0);
  if (static_cast<std::size_t>(b.size()) != expected) {
    throw DimensionError("logistic model has " + std::to_string(b.size()) +
                         " coefficients, point needs " +
                         std::to_string(expected));
  }
  double eta = confidence * b(0);
  for (std::size_t j = 0; j < x.size(); ++j) {
    eta += x[j] * b(static_cast<Eigen::Index>(j + 1));
  }
  if (intercept_) eta += b(b.size() - 1);
  return sigmoid(eta);
}

double PhiModel::predict_cluster(std::size_t cluster, double confidence) const {
  if (auto rate = cluster_rate(cluster)) return *rate;
  return prior_phi(confidence);
}

double PhiModel::predict(const TestPoint& point) const {
  switch (kind_) {
    case PhiKind::prior:
      return prior_phi(point.confidence);
    case PhiKind::logistic:
      return predict_linear(point.confidence, point.features);
    case PhiKind::cluster_rates: {
      auto it = geometry_->by_id.find(point.id);
      if (it == geometry_->by_id.end()) {
        throw ConsistencyError("no cluster assignment for point '" + point.id +
                               "'");
      }
      return predict_cluster(it->second, point.confidence);
    }
  }
  return prior_phi(point.confidence);
}

double PhiModel::predict(const TestSet& ts, std::size_t index) const {
  if (kind_ == PhiKind::cluster_rates) {
    if (geometry_->assignment.size() != ts.size()) {
      throw ConsistencyError("cluster geometry built for another test set");
    }
    return predict_cluster(geometry_->assignment[index], ts.confidence(index));
  }
  return predict(ts[index]);
}

double predict_phi(const PhiModel& model, const TestPoint& point) {
  return model.predict(point);
}

std::optional<PhiModel> fit_logistic(const TestSet& ts, const SearchState& state,
                                     const LogisticOptions& options) {
  state.check_consistent(ts);
  if (state.uu_count() == 0 || state.correct_count() == 0) return std::nullopt;

  const auto& rows = state.queried();
  const Eigen::Index cols =
      static_cast<Eigen::Index>(ts.dim() + 1 + (options.intercept ? 1 : 0));
  Eigen::MatrixXd design(static_cast<Eigen::Index>(rows.size()), cols);
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto i = static_cast<Eigen::Index>(r);
    const std::size_t idx = rows[r];
    design(i, 0) = ts.confidence(idx);
    const auto f = ts.features(idx);
    for (std::size_t j = 0; j < f.size(); ++j) {
      design(i, static_cast<Eigen::Index>(j + 1)) = f[j];
    }
    if (options.intercept) design(i, cols - 1) = 1.0;
    y(i) = state.is_uu(idx) ? 1.0 : 0.0;
  }
  return PhiModel::logistic(fit_logistic_irls(design, y, options),
                            options.intercept);
}

PhiModel cluster_rates_model(std::shared_ptr<const ClusterGeometry> geometry,
                             const SearchState& state) {
  if (!geometry || geometry->assignment.size() != state.size()) {
    throw ConsistencyError("cluster geometry built for another test set");
  }
  std::vector<ClusterStat> stats(geometry->k);
  for (std::size_t idx : state.queried()) {
    ClusterStat& s = stats[geometry->assignment[idx]];
    ++s.queried;
    if (state.is_uu(idx)) ++s.uus;
  }
  return PhiModel::cluster_rates(std::move(geometry), std::move(stats));
}

PhiModel fit_cluster_rates(const TestSet& ts, const SearchState& state,
                           std::size_t k, std::uint64_t seed) {
  state.check_consistent(ts);
  auto geometry =
      std::make_shared<const ClusterGeometry>(kmeans_clusters(ts, k, seed));
  return cluster_rates_model(std::move(geometry), state);
}

}  // namespace uuaudit
