#include "uuaudit/distance.hpp"

#include <algorithm>
#include <string>

#include "uuaudit/errors.hpp"

namespace uuaudit {

double euclidean_distance(std::span<const double> x,
                          std::span<const double> q) {
  if (x.size() != q.size()) {
    throw DimensionError("distance between vectors of length " +
                         std::to_string(x.size()) + " and " +
                         std::to_string(q.size()));
  }
  return detail::euclidean_unchecked(x.data(), q.data(), x.size());
}

PairwiseDistances::PairwiseDistances(const TestSet& ts)
    : n_(ts.size()), table_(ts.size() * ts.size(), 0.0) {
  for (std::size_t a = 0; a < n_; ++a) {
    for (std::size_t b = a + 1; b < n_; ++b) {
      const double d = point_distance(ts, a, b);
      table_[a * n_ + b] = d;
      table_[b * n_ + a] = d;
      diameter_ = std::max(diameter_, d);
    }
  }
}

double diameter(const TestSet& ts) {
  double best = 0.0;
  for (std::size_t a = 0; a < ts.size(); ++a) {
    for (std::size_t b = a + 1; b < ts.size(); ++b) {
      best = std::max(best, point_distance(ts, a, b));
    }
  }
  return best;
}

}  // namespace uuaudit
