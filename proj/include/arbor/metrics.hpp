#pragma once

#include "arbor/mask.hpp"

#include <array>
#include <span>
#include <vector>

namespace arbor {

enum class MatchMode { Box, Mask };

struct EvalPair {
  std::vector<SegmentMask> predictions;
  std::vector<SegmentMask> ground_truth;  // scores ignored
};

struct DepthPair {
  double estimated = 0.0;
  double ground_truth = 0.0;
};

inline constexpr int kNumIouThresholds = 10;

/// 0.50, 0.55, ..., 0.95.
std::array<double, kNumIouThresholds> iou_thresholds();

double iou_box(const BBox& a, const BBox& b);
double iou_mask(const BinaryMask& a, const BinaryMask& b);

/// 101-point interpolated AP over one or more frames. Predictions are ranked by
/// descending score (ties: frame order, then instance_id) and greedily matched
/// to the unmatched ground truth of highest IoU >= threshold in their frame.
/// With no ground truth at all, AP is 1 when there are also no predictions, else 0.
double average_precision(std::span<const EvalPair> frames, double iou_threshold, MatchMode mode);
double average_precision(const EvalPair& pair, double iou_threshold, MatchMode mode);

std::array<double, kNumIouThresholds> per_threshold_ap(std::span<const EvalPair> frames, MatchMode mode);

/// Mean of AP over the ten thresholds.
double map_50_95(std::span<const EvalPair> frames, MatchMode mode);
double map_50_95(const EvalPair& pair, MatchMode mode);

/// sqrt(mean((ground_truth - estimated)^2)). Throws EmptyEval on an empty set.
double rmse(std::span<const DepthPair> pairs);

}  // namespace arbor
