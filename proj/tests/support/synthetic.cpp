#include "synthetic.hpp"

#include <cmath>
#include <numbers>

namespace uuaudit::testing {

double gaussian(Rng& rng) {
  // Box-Muller; avoids implementation-defined std::normal_distribution.
  const double u1 = 1.0 - rng.unit();
  const double u2 = rng.unit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.unit(); }

bool bernoulli(Rng& rng, double p) { return rng.unit() < p; }

std::string point_id(std::size_t i) {
  std::string s = std::to_string(i);
  return "p" + std::string(s.size() < 5 ? 5 - s.size() : 0, '0') + s;
}

LabeledPoint make_point(std::size_t i, std::vector<double> features, double c,
                        bool wrong, Rng& rng) {
  LabeledPoint lp;
  lp.point.id = point_id(i);
  lp.point.features = std::move(features);
  lp.point.confidence = c;
  lp.point.predicted_class = bernoulli(rng, 0.5) ? "pos" : "neg";
  lp.truth = wrong ? (lp.point.predicted_class == "pos" ? "neg" : "pos")
                   : lp.point.predicted_class;
  return lp;
}

AuditData assemble(std::vector<LabeledPoint> pts, std::optional<std::string> critical) {
  std::vector<TestPoint> points;
  GroundTruth truth;
  for (auto& lp : pts) {
    points.push_back(std::move(lp.point));
    truth.emplace_back(std::move(lp.truth));
  }
  return AuditData(TestSet(std::move(points), std::move(critical)), std::move(truth));
}

AuditData calibrated_pool(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<LabeledPoint> pts;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = uniform(rng, 0.5, 1.0);
    std::vector<double> x{gaussian(rng), gaussian(rng)};
    const bool wrong = bernoulli(rng, 1.0 - c);
    pts.push_back(make_point(i, std::move(x), c, wrong, rng));
  }
  return assemble(std::move(pts));
}

AuditData planted_high_pool(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<LabeledPoint> pts;
  for (std::size_t i = 0; i < n; ++i) {
    const bool blob = bernoulli(rng, 0.3);
    double c;
    std::vector<double> x;
    bool wrong;
    if (blob) {
      c = uniform(rng, 0.88, 0.92);
      x = {6.0 + 0.7 * gaussian(rng), 6.0 + 0.7 * gaussian(rng)};
      wrong = bernoulli(rng, 0.5);
    } else {
      c = uniform(rng, 0.65, 0.75);
      x = {gaussian(rng), gaussian(rng)};
      wrong = bernoulli(rng, 1.0 - c);
    }
    pts.push_back(make_point(i, std::move(x), c, wrong, rng));
  }
  return assemble(std::move(pts));
}

AuditData planted_near_tau_pool(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<LabeledPoint> pts;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = uniform(rng, 0.65, 1.0);
    std::vector<double> x{gaussian(rng), gaussian(rng)};
    const bool wrong = c < 0.75 ? bernoulli(rng, 0.5) : bernoulli(rng, 1.0 - c);
    pts.push_back(make_point(i, std::move(x), c, wrong, rng));
  }
  return assemble(std::move(pts));
}

AuditData low_confidence_errors_pool(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<LabeledPoint> pts;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = uniform(rng, 0.5, 1.0);
    std::vector<double> x{gaussian(rng), gaussian(rng)};
    const bool wrong = c < 0.75 && bernoulli(rng, 1.0 - c);
    pts.push_back(make_point(i, std::move(x), c, wrong, rng));
  }
  return assemble(std::move(pts));
}

AuditData random_instance(Rng& rng, std::size_t n, std::size_t p, bool grid_features) {
  std::vector<LabeledPoint> pts;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(p);
    for (double& v : x) {
      v = grid_features ? static_cast<double>(rng.below(3)) : uniform(rng, -2.0, 2.0);
    }
    double c;
    switch (rng.below(8)) {
      case 0: c = 1.0; break;
      case 1: c = 0.5; break;
      case 2: c = 0.0; break;
      default: c = rng.unit();
    }
    const bool wrong = bernoulli(rng, 0.5);
    pts.push_back(make_point(i, std::move(x), c, wrong, rng));
  }
  return assemble(std::move(pts));
}

}  // namespace uuaudit::testing
