#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace uuaudit {

struct SvdOptions {
  bool center = false;  // subtract column means before factorising
  std::uint64_t seed = 0;
  double tolerance = 1e-12;  // max-abs change of the unit vector
  int max_iterations = 10000;
};

struct TruncatedSvd {
  Eigen::VectorXd singular_values;  // descending
  Eigen::MatrixXd right_vectors;    // m x k, orthonormal columns
  Eigen::MatrixXd scores;           // n x k, U * diag(singular_values)
  Eigen::RowVectorXd column_means;  // zeros unless centred
};

/// Rank-k SVD by power iteration on A^T A with deflation against the
/// components already found. Throws DimensionError unless 1 <= k <=
/// min(n, m) and ValidationError on non-finite input.
TruncatedSvd truncated_svd(const Eigen::MatrixXd& raw, int k,
                           const SvdOptions& options = {});

/// Rank-k score matrix (n x k) used as the derived feature space.
Eigen::MatrixXd derive_features(const Eigen::MatrixXd& raw, int k,
                                const SvdOptions& options = {});

}  // namespace uuaudit
