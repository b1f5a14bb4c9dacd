#pragma once

#include "arbor/core.hpp"

#include <cstdint>
#include <vector>

namespace arbor {

struct SgbmParams {
  int min_disparity = 0;
  int num_disparities = 128;
  int block_size = 5;
  int p1 = 600;
  int p2 = 2400;
  int uniqueness_ratio = 10;  // percent
  int speckle_window = 100;
  double speckle_range = 32.0;
  int num_paths = 8;
  bool lr_check = true;
  double lr_max_diff = 1.0;
  int jobs = 1;  // worker threads; output does not depend on it

  void validate() const;
  /// Census bits per pixel for `block_size` (window area minus the center).
  int census_bits() const { return block_size * block_size - 1; }
  /// Cost assigned where the correspondence falls outside the other view.
  int large_cost() const { return census_bits() + 1; }
};

using CensusImage = Raster<std::uint64_t>;

/// Per-pixel, per-disparity cost. Disparities of one pixel are contiguous:
/// the column `v * width + u` holds costs for disparity index 0..D-1, where
/// index k means disparity min_disparity + k.
template <typename Cost>
struct CostVolume {
  int width = 0;
  int height = 0;
  int num_disparities = 0;
  Eigen::Matrix<Cost, Eigen::Dynamic, Eigen::Dynamic> costs;

  CostVolume() = default;
  CostVolume(int w, int h, int d) : width(w), height(h), num_disparities(d), costs(d, Eigen::Index(w) * h) {
    costs.setZero();
  }

  Cost& operator()(int u, int v, int k) { return costs(k, Eigen::Index(v) * width + u); }
  Cost operator()(int u, int v, int k) const { return costs(k, Eigen::Index(v) * width + u); }
  Cost* pixel(int u, int v) { return costs.col(Eigen::Index(v) * width + u).data(); }
  const Cost* pixel(int u, int v) const { return costs.col(Eigen::Index(v) * width + u).data(); }
};

using MatchingCost = CostVolume<std::uint8_t>;
using BlockCost = CostVolume<std::uint16_t>;
using AggregatedCost = CostVolume<std::uint16_t>;

/// Bit i is set iff the i-th window neighbour (row-major, center skipped) is
/// strictly darker than the center. Borders replicate edge pixels.
CensusImage census_transform(const ImageBuffer& img, int window);

/// cost(u, v, k) = popcount(left(u, v) ^ right(u - d, v)), d = min_disparity + k.
/// Out-of-range correspondences get params.large_cost().
MatchingCost compute_cost_volume(const CensusImage& left, const CensusImage& right, const SgbmParams& params);

/// Roles swapped for the right view: cost(u, v, k) compares right(u, v) with left(u + d, v).
MatchingCost compute_right_cost_volume(const CensusImage& left, const CensusImage& right, const SgbmParams& params);

/// Sums each disparity plane over a block x block window (edge replicated),
/// turning per-pixel census distances into block matching costs.
BlockCost block_sum_costs(const MatchingCost& volume, int block, int jobs = 1);

/// Path directions (du, dv) in aggregation order; the first four are the axis paths.
std::vector<Eigen::Vector2i> aggregation_directions(int num_paths);

/// Sum over paths r of L_r(p, d) = C(p, d) + min(L_r(p-r, d), L_r(p-r, d+-1) + P1,
/// min_k L_r(p-r, k) + P2) - min_k L_r(p-r, k), with L_r = C where p - r leaves the image.
/// Instantiated for MatchingCost and BlockCost.
template <typename Cost>
AggregatedCost aggregate_costs(const CostVolume<Cost>& volume, const SgbmParams& params);

/// Winner-take-all with uniqueness test and parabolic subpixel refinement.
DisparityMap select_disparity(const AggregatedCost& aggregated, const SgbmParams& params);

/// Keeps left pixel u iff |dL(u) - dR(u - round(dL(u)))| <= max_diff.
DisparityMap lr_consistency_filter(const DisparityMap& left, const DisparityMap& right, double max_diff);

/// Invalidates 4-connected components smaller than `window` pixels; neighbours
/// connect when both are valid and differ by at most `range`.
DisparityMap speckle_filter(const DisparityMap& disp, int window, double range);

struct SgbmResult {
  DisparityMap left;   // final output
  DisparityMap right;  // right-view disparity (empty unless lr_check)
};

SgbmResult sgbm_match(const StereoFrame& frame, const SgbmParams& params);
DisparityMap sgbm_full(const StereoFrame& frame, const SgbmParams& params);

}  // namespace arbor
