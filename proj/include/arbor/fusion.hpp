#pragma once

#include "arbor/core.hpp"
#include "arbor/mask.hpp"

#include <span>
#include <string>
#include <vector>

namespace arbor {

struct DepthSample {
  int u = 0;
  int v = 0;
  double depth = 0.0;
};

struct BranchEstimate {
  std::int64_t instance_id = 0;
  std::string label;
  int pixel_count = 0;
  int valid_count = 0;
  int used_count = 0;  // samples kept after outlier rejection
  double mean_depth = 0.0;
  double median_depth = 0.0;
  double std_depth = 0.0;
  double valid_ratio = 0.0;
  Point3D centroid = Point3D::Zero();
};

struct Exclusion {
  std::int64_t instance_id = 0;
  std::string reason;
};

struct Localization {
  std::vector<BranchEstimate> estimates;  // input mask order
  std::vector<Exclusion> excluded;        // input mask order
};

inline constexpr double kDefaultMinValidRatio = 0.25;

/// Mask pixels paired with their depth; invalid depths are skipped.
std::vector<DepthSample> register_mask(const SegmentMask& mask, const DepthMap& depth);

/// Median of the values (mean of the two middle values for even counts).
double median_of(std::vector<double> values);

/// Robust per-instance statistics. Samples farther than 3 robust sigmas from
/// the median are dropped first; sigma = 1.4826 * MAD, or 1.2533 * mean
/// absolute deviation when MAD is zero, and no rejection when both are zero.
/// Mean/median/population std and the centroid use the kept samples; the
/// centroid back-projects their mean (u, v) at the median depth.
BranchEstimate summarize(std::span<const DepthSample> samples, const CameraCalibration& calib,
                         double min_valid_ratio, int pixel_count);

/// Each mask is summarized independently; failures become exclusions.
Localization localize_branches(std::span<const SegmentMask> masks, const DepthMap& depth,
                               const CameraCalibration& calib, double min_valid_ratio = kDefaultMinValidRatio,
                               int jobs = 1);

}  // namespace arbor
