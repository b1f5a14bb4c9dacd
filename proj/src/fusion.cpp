#include "arbor/fusion.hpp"

#include "arbor/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace arbor {

std::vector<DepthSample> register_mask(const SegmentMask& mask, const DepthMap& depth) {
  if (mask.width() != depth.width() || mask.height() != depth.height()) {
    throw Error(ErrorCode::ShapeError, "mask and depth map sizes differ");
  }
  std::vector<DepthSample> samples;
  for (int v = 0; v < depth.height(); ++v) {
    for (int u = 0; u < depth.width(); ++u) {
      if (mask.mask(v, u) && depth.valid(u, v)) samples.push_back({u, v, static_cast<double>(depth(u, v))});
    }
  }
  return samples;
}

double median_of(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::NoValidData, "median of an empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

BranchEstimate summarize(std::span<const DepthSample> samples, const CameraCalibration& calib,
                         double min_valid_ratio, int pixel_count) {
  if (pixel_count <= 0) throw Error(ErrorCode::ParamError, "pixel_count must be positive");
  if (static_cast<int>(samples.size()) > pixel_count) {
    throw Error(ErrorCode::ParamError, "more samples than mask pixels");
  }
  BranchEstimate est;
  est.pixel_count = pixel_count;
  est.valid_count = static_cast<int>(samples.size());
  est.valid_ratio = static_cast<double>(est.valid_count) / pixel_count;
  if (samples.empty() || est.valid_ratio < min_valid_ratio) {
    throw Error(ErrorCode::InsufficientDepth, "valid depth ratio " + std::to_string(est.valid_ratio) +
                                                  " below " + std::to_string(min_valid_ratio));
  }

  std::vector<double> depths(samples.size());
  std::transform(samples.begin(), samples.end(), depths.begin(), [](const DepthSample& s) { return s.depth; });
  const double center = median_of(depths);
  std::vector<double> deviations(depths.size());
  std::transform(depths.begin(), depths.end(), deviations.begin(), [center](double z) { return std::abs(z - center); });
  double sigma = 1.4826 * median_of(deviations);
  if (sigma == 0.0) {
    double mean_abs = 0.0;
    for (double d : deviations) mean_abs += d;
    sigma = 1.2533 * mean_abs / static_cast<double>(deviations.size());
  }

  std::vector<const DepthSample*> kept;
  kept.reserve(samples.size());
  for (const auto& s : samples) {
    if (sigma == 0.0 || std::abs(s.depth - center) <= 3.0 * sigma) kept.push_back(&s);
  }

  const double n = static_cast<double>(kept.size());
  double sum = 0.0;
  double sum_u = 0.0;
  double sum_v = 0.0;
  std::vector<double> kept_depths;
  kept_depths.reserve(kept.size());
  for (const DepthSample* s : kept) {
    sum += s->depth;
    sum_u += s->u;
    sum_v += s->v;
    kept_depths.push_back(s->depth);
  }
  est.used_count = static_cast<int>(kept.size());
  est.mean_depth = sum / n;
  double sq = 0.0;
  for (double z : kept_depths) sq += (z - est.mean_depth) * (z - est.mean_depth);
  est.std_depth = std::sqrt(sq / n);
  est.median_depth = median_of(std::move(kept_depths));
  est.centroid = back_project(sum_u / n, sum_v / n, est.median_depth, calib);
  return est;
}

Localization localize_branches(std::span<const SegmentMask> masks, const DepthMap& depth,
                               const CameraCalibration& calib, double min_valid_ratio, int jobs) {
  std::vector<std::optional<BranchEstimate>> results(masks.size());
  std::vector<std::string> reasons(masks.size());
  parallel_for(0, static_cast<int>(masks.size()), jobs, [&](int i) {
    const SegmentMask& m = masks[static_cast<std::size_t>(i)];
    try {
      const int pixel_count = static_cast<int>((m.mask != 0).count());
      if (pixel_count == 0) throw Error(ErrorCode::InsufficientDepth, "empty mask");
      const auto samples = register_mask(m, depth);
      BranchEstimate est = summarize(samples, calib, min_valid_ratio, pixel_count);
      est.instance_id = m.instance_id;
      est.label = m.label;
      results[static_cast<std::size_t>(i)] = std::move(est);
    } catch (const Error& e) {
      reasons[static_cast<std::size_t>(i)] = e.what();
    }
  });
  Localization out;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    if (results[i]) out.estimates.push_back(std::move(*results[i]));
    else out.excluded.push_back({masks[i].instance_id, reasons[i]});
  }
  return out;
}

}  // namespace arbor
