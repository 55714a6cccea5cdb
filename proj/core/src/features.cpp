#include "uuaudit/features.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "uuaudit/errors.hpp"
#include "uuaudit/rng.hpp"

namespace uuaudit {

TruncatedSvd truncated_svd(const Eigen::MatrixXd& raw, int k,
                           const SvdOptions& options) {
  const Eigen::Index n = raw.rows();
  const Eigen::Index m = raw.cols();
  if (k < 1 || k > std::min(n, m)) {
    throw DimensionError("target dimension " + std::to_string(k) +
                         " outside [1, " + std::to_string(std::min(n, m)) +
                         "]");
  }
  if (!raw.allFinite()) throw ValidationError("feature matrix has non-finite entries");

  TruncatedSvd out;
  out.column_means = Eigen::RowVectorXd::Zero(m);
  Eigen::MatrixXd a = raw;
  if (options.center) {
    out.column_means = a.colwise().mean();
    a.rowwise() -= out.column_means;
  }

  out.singular_values.resize(k);
  out.right_vectors.resize(m, k);
  Rng rng(options.seed);

  auto deflate = [&](Eigen::VectorXd& v, Eigen::Index found) {
    // Two passes of Gram-Schmidt keep v orthogonal to earlier components.
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index j = 0; j < found; ++j) {
        v -= out.right_vectors.col(j).dot(v) * out.right_vectors.col(j);
      }
    }
  };

  for (Eigen::Index c = 0; c < k; ++c) {
    Eigen::VectorXd v(m);
    for (Eigen::Index i = 0; i < m; ++i) v(i) = rng.unit() - 0.5;
    deflate(v, c);
    v.normalize();

    for (int it = 0; it < options.max_iterations; ++it) {
      Eigen::VectorXd w = a.transpose() * (a * v);
      deflate(w, c);
      const double norm = w.norm();
      if (norm == 0.0) break;  // remaining spectrum is zero; any unit v works
      w /= norm;
      const double change = (w - v).cwiseAbs().maxCoeff();
      v = std::move(w);
      if (change < options.tolerance) break;
    }
    out.right_vectors.col(c) = v;
    out.singular_values(c) = (a * v).norm();
  }

  out.scores = a * out.right_vectors;
  return out;
}

Eigen::MatrixXd derive_features(const Eigen::MatrixXd& raw, int k,
                                const SvdOptions& options) {
  return truncated_svd(raw, k, options).scores;
}

}  // namespace uuaudit
