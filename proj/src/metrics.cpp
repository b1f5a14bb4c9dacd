#include "arbor/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace arbor {

std::array<double, kNumIouThresholds> iou_thresholds() {
  std::array<double, kNumIouThresholds> t{};
  for (int i = 0; i < kNumIouThresholds; ++i) t[static_cast<std::size_t>(i)] = (50 + 5 * i) / 100.0;
  return t;
}

double iou_box(const BBox& a, const BBox& b) {
  if (a.x_min > a.x_max || a.y_min > a.y_max || b.x_min > b.x_max || b.y_min > b.y_max) {
    throw Error(ErrorCode::ParamError, "malformed box");
  }
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  const double inter = (iw > 0.0 && ih > 0.0) ? iw * ih : 0.0;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

double iou_mask(const BinaryMask& a, const BinaryMask& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error(ErrorCode::ShapeError, "mask sizes differ");
  const auto sa = (a != 0);
  const auto sb = (b != 0);
  const auto inter = (sa && sb).count();
  const auto uni = (sa || sb).count();
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

namespace {

struct RankedPrediction {
  std::size_t frame;
  std::size_t index;
  double score;
  std::int64_t instance_id;
};

double overlap(const SegmentMask& a, const SegmentMask& b, MatchMode mode) {
  return mode == MatchMode::Box ? iou_box(a.bbox, b.bbox) : iou_mask(a.mask, b.mask);
}

}  // namespace

double average_precision(std::span<const EvalPair> frames, double iou_threshold, MatchMode mode) {
  if (!(iou_threshold >= 0.5 - 1e-12 && iou_threshold <= 0.95 + 1e-12)) {
    throw Error(ErrorCode::ParamError, "IoU threshold must lie in [0.5, 0.95]");
  }
  std::size_t num_gt = 0;
  std::vector<RankedPrediction> ranked;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    num_gt += frames[f].ground_truth.size();
    for (std::size_t i = 0; i < frames[f].predictions.size(); ++i) {
      const auto& p = frames[f].predictions[i];
      ranked.push_back({f, i, p.score, p.instance_id});
    }
  }
  if (num_gt == 0) return ranked.empty() ? 1.0 : 0.0;
  if (ranked.empty()) return 0.0;

  std::stable_sort(ranked.begin(), ranked.end(), [](const RankedPrediction& a, const RankedPrediction& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.frame != b.frame) return a.frame < b.frame;
    return a.instance_id < b.instance_id;
  });

  std::vector<std::vector<bool>> matched(frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) matched[f].assign(frames[f].ground_truth.size(), false);

  std::vector<double> precision(ranked.size());
  std::vector<double> recall(ranked.size());
  std::size_t tp = 0;
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    const EvalPair& frame = frames[ranked[r].frame];
    const SegmentMask& pred = frame.predictions[ranked[r].index];
    double best_iou = -1.0;
    std::size_t best_gt = 0;
    for (std::size_t g = 0; g < frame.ground_truth.size(); ++g) {
      if (matched[ranked[r].frame][g]) continue;
      const double iou = overlap(pred, frame.ground_truth[g], mode);
      if (iou >= iou_threshold && iou > best_iou) {
        best_iou = iou;
        best_gt = g;
      }
    }
    if (best_iou >= 0.0) {
      matched[ranked[r].frame][best_gt] = true;
      ++tp;
    }
    precision[r] = static_cast<double>(tp) / static_cast<double>(r + 1);
    recall[r] = static_cast<double>(tp) / static_cast<double>(num_gt);
  }

  // Running max from the tail gives max precision over all points with recall >= r.
  for (std::size_t r = precision.size() - 1; r > 0; --r) precision[r - 1] = std::max(precision[r - 1], precision[r]);

  double total = 0.0;
  std::size_t pos = 0;
  for (int i = 0; i <= 100; ++i) {
    const double level = i / 100.0;
    while (pos < recall.size() && recall[pos] < level) ++pos;
    if (pos == recall.size()) break;
    total += precision[pos];
  }
  return total / 101.0;
}

double average_precision(const EvalPair& pair, double iou_threshold, MatchMode mode) {
  return average_precision(std::span<const EvalPair>(&pair, 1), iou_threshold, mode);
}

std::array<double, kNumIouThresholds> per_threshold_ap(std::span<const EvalPair> frames, MatchMode mode) {
  std::array<double, kNumIouThresholds> ap{};
  const auto thresholds = iou_thresholds();
  for (std::size_t i = 0; i < ap.size(); ++i) ap[i] = average_precision(frames, thresholds[i], mode);
  return ap;
}

double map_50_95(std::span<const EvalPair> frames, MatchMode mode) {
  const auto ap = per_threshold_ap(frames, mode);
  return std::accumulate(ap.begin(), ap.end(), 0.0) / kNumIouThresholds;
}

double map_50_95(const EvalPair& pair, MatchMode mode) { return map_50_95(std::span<const EvalPair>(&pair, 1), mode); }

double rmse(std::span<const DepthPair> pairs) {
  if (pairs.empty()) throw Error(ErrorCode::EmptyEval, "no depth pairs");
  double sum = 0.0;
  for (const auto& p : pairs) {
    const double e = p.ground_truth - p.estimated;
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(pairs.size()));
}

}  // namespace arbor
