#include "uuaudit/profile.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "uuaudit/errors.hpp"
#include "uuaudit/spline.hpp"

namespace uuaudit {
namespace {

constexpr std::size_t kMinPoints = 10;

// Equal-count bins; value at each bin's mean confidence, linear in between,
// flat beyond the outer bins.
std::vector<double> binned_curve(const std::vector<double>& c,
                                 const std::vector<double>& correct,
                                 std::size_t bins,
                                 const std::vector<double>& grid) {
  std::vector<std::size_t> order(c.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return c[a] < c[b]; });
  bins = std::min(bins, c.size());
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t k = 0; k < bins; ++k) {
    const std::size_t lo = k * c.size() / bins;
    const std::size_t hi = (k + 1) * c.size() / bins;
    double sx = 0.0;
    double sy = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      sx += c[order[i]];
      sy += correct[order[i]];
    }
    const double cnt = static_cast<double>(hi - lo);
    const double mx = sx / cnt;
    if (!xs.empty() && mx == xs.back()) {
      // Bins sharing a confidence value collapse into one knot.
      ys.back() = 0.5 * (ys.back() + sy / cnt);
      continue;
    }
    xs.push_back(mx);
    ys.push_back(sy / cnt);
  }
  std::vector<double> out;
  out.reserve(grid.size());
  for (const double g : grid) {
    if (g <= xs.front()) {
      out.push_back(ys.front());
    } else if (g >= xs.back()) {
      out.push_back(ys.back());
    } else {
      const auto it = std::upper_bound(xs.begin(), xs.end(), g);
      const std::size_t j = static_cast<std::size_t>(it - xs.begin());
      const double t = (g - xs[j - 1]) / (xs[j] - xs[j - 1]);
      out.push_back(ys[j - 1] + t * (ys[j] - ys[j - 1]));
    }
  }
  return out;
}

}  // namespace

OverconfidenceProfile overconfidence_profile(const AuditData& labeled,
                                             const ProfileOptions& opts) {
  if (!(opts.bandwidth > 0.0)) throw DomainError("bandwidth must be positive");
  if (opts.grid_points < 2) throw ConfigError("profile grid needs >= 2 points");
  const TestSet& ts = labeled.set;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (!labeled.truth[i]) {
      throw ValidationError("point '" + ts[i].id + "' has no true label");
    }
  }
  if (ts.size() < kMinPoints) {
    throw InsufficientDataError("profile needs at least 10 labeled points, got " +
                                std::to_string(ts.size()));
  }

  std::vector<double> c(ts.size());
  std::vector<double> correct(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    c[i] = ts.confidence(i);
    correct[i] = *labeled.truth[i] == ts[i].predicted_class ? 1.0 : 0.0;
  }
  const auto [lo, hi] = std::minmax_element(c.begin(), c.end());

  OverconfidenceProfile p;
  const std::size_t g = opts.grid_points;
  if (*hi > *lo) {
    for (std::size_t k = 0; k < g; ++k) {
      p.grid.push_back(*lo + (*hi - *lo) * static_cast<double>(k) /
                                 static_cast<double>(g - 1));
    }
    p.grid.back() = *hi;
  } else {
    // Degenerate spread: a single grid value.
    p.grid.push_back(*lo);
  }

  if (opts.smoother == Smoother::spline) {
    const auto spline = SmoothingSpline::fit(c, correct);
    p.lambda = spline.lambda();
    for (const double x : p.grid) p.estimated_accuracy.push_back(spline(x));
  } else {
    p.estimated_accuracy = binned_curve(c, correct, opts.bins, p.grid);
  }

  std::vector<double> sorted = c;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t k = 0; k < p.grid.size(); ++k) {
    double& a = p.estimated_accuracy[k];
    a = std::clamp(a, 0.0, 1.0);
    p.overconfidence.push_back(p.grid[k] - a);
    const auto first = std::lower_bound(sorted.begin(), sorted.end(),
                                        p.grid[k] - opts.bandwidth);
    const auto last = std::upper_bound(sorted.begin(), sorted.end(),
                                       p.grid[k] + opts.bandwidth);
    p.support.push_back(static_cast<std::size_t>(last - first));
  }
  return p;
}

nlohmann::ordered_json to_json(const OverconfidenceProfile& p) {
  nlohmann::ordered_json j;
  j["grid"] = p.grid;
  j["estimated_accuracy"] = p.estimated_accuracy;
  j["overconfidence"] = p.overconfidence;
  j["support"] = p.support;
  j["lambda"] = p.lambda;
  return j;
}

}  // namespace uuaudit
