#pragma once

#include <optional>
#include <span>
#include <vector>

namespace uuaudit {

/// Cubic smoothing spline minimising
///   sum_i w_i (y_i - g(x_i))^2 + lambda * integral g''(t)^2 dt
/// (Reinsch form, O(n) banded solves). Tied x values are pooled into one
/// knot with summed weight. When lambda is not given it is chosen by
/// generalised cross-validation over a log grid refined by golden section.
class SmoothingSpline {
 public:
  static SmoothingSpline fit(std::span<const double> x, std::span<const double> y,
                             std::optional<double> lambda = std::nullopt);

  double operator()(double x) const;

  double lambda() const { return lambda_; }
  double gcv_score() const { return gcv_; }
  /// Trace of the smoother matrix.
  double effective_df() const { return df_; }
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& fitted() const { return values_; }

 private:
  // Knots are stored in the normalised coordinate (x - x0) / scale.
  double x0_ = 0.0;
  double scale_ = 1.0;
  std::vector<double> knots_;
  std::vector<double> values_;   // g at each knot
  std::vector<double> second_;   // g'' at each knot (0 at the ends)
  double lambda_ = 0.0;
  double gcv_ = 0.0;
  double df_ = 0.0;
};

}  // namespace uuaudit
