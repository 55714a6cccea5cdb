#pragma once

#include <cstddef>
#include <vector>

#include <json.hpp>

#include "uuaudit/testset.hpp"

namespace uuaudit {

/// Actual accuracy against stated confidence on a grid of confidence values.
struct OverconfidenceProfile {
  std::vector<double> grid;                // ascending confidences
  std::vector<double> estimated_accuracy;  // in [0, 1]
  std::vector<double> overconfidence;      // grid - estimated_accuracy
  std::vector<std::size_t> support;        // points within bandwidth of grid
  double lambda = 0.0;                     // spline penalty used (0 if binned)
};

enum class Smoother { spline, binned };

struct ProfileOptions {
  double bandwidth = 0.05;
  Smoother smoother = Smoother::spline;
  std::size_t grid_points = 101;
  std::size_t bins = 20;  // binned smoother only
};

/// Smooths the correct-classification indicator against confidence.
/// Throws ValidationError when a point lacks a true label, DomainError for a
/// non-positive bandwidth and InsufficientDataError below 10 points.
OverconfidenceProfile overconfidence_profile(const AuditData& labeled,
                                             const ProfileOptions& opts = {});

nlohmann::ordered_json to_json(const OverconfidenceProfile& p);

}  // namespace uuaudit
