#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "uuaudit/testset.hpp"

namespace uuaudit {

/// Euclidean distance. Throws DimensionError on length mismatch.
double euclidean_distance(std::span<const double> x, std::span<const double> q);

namespace detail {
// Unchecked kernel shared by every distance path so cached and on-the-fly
// values are bit-identical.
inline double euclidean_unchecked(const double* x, const double* q,
                                  std::size_t p) {
  double acc = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    const double d = x[j] - q[j];
    acc += d * d;
  }
  return __builtin_sqrt(acc);
}
}  // namespace detail

inline double point_distance(const TestSet& ts, std::size_t a, std::size_t b) {
  return detail::euclidean_unchecked(ts.features(a).data(),
                                     ts.features(b).data(), ts.dim());
}

/// Dense symmetric n x n distance table for one test set (8 n^2 bytes).
class PairwiseDistances {
 public:
  explicit PairwiseDistances(const TestSet& ts);

  std::size_t size() const { return n_; }
  double operator()(std::size_t a, std::size_t b) const {
    return table_[a * n_ + b];
  }
  std::span<const double> row(std::size_t a) const {
    return {table_.data() + a * n_, n_};
  }
  /// Largest pairwise distance.
  double diameter() const { return diameter_; }

 private:
  std::size_t n_;
  std::vector<double> table_;
  double diameter_ = 0.0;
};

/// Max pairwise distance computed without materialising the table.
double diameter(const TestSet& ts);

}  // namespace uuaudit
