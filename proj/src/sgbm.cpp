#include "arbor/sgbm.hpp"

#include "arbor/parallel.hpp"
#include "arbor/preprocess.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace arbor {

void SgbmParams::validate() const {
  if (min_disparity < 0) throw Error(ErrorCode::ParamError, "min_disparity must be >= 0");
  if (num_disparities <= 0 || num_disparities % 16 != 0) {
    throw Error(ErrorCode::ParamError, "num_disparities must be a positive multiple of 16");
  }
  if (block_size < 3 || block_size % 2 == 0) throw Error(ErrorCode::ParamError, "block_size must be odd and >= 3");
  if (block_size > 7) throw Error(ErrorCode::ParamError, "block_size above 7 exceeds 64 census bits");
  if (!(p2 > p1 && p1 > 0)) throw Error(ErrorCode::ParamError, "penalties must satisfy p2 > p1 > 0");
  if (uniqueness_ratio < 0) throw Error(ErrorCode::ParamError, "uniqueness_ratio must be >= 0");
  if (speckle_window < 0) throw Error(ErrorCode::ParamError, "speckle_window must be >= 0");
  if (!(speckle_range >= 0.0)) throw Error(ErrorCode::ParamError, "speckle_range must be >= 0");
  if (num_paths != 4 && num_paths != 8) throw Error(ErrorCode::ParamError, "num_paths must be 4 or 8");
  if (!(lr_max_diff >= 0.0)) throw Error(ErrorCode::ParamError, "lr_max_diff must be >= 0");
}

CensusImage census_transform(const ImageBuffer& img, int window) {
  if (window < 3 || window % 2 == 0) throw Error(ErrorCode::ParamError, "census window must be odd and >= 3");
  if (window > 7) throw Error(ErrorCode::ParamError, "census window above 7 exceeds 64 bits");
  if (img.channels() != 1) throw Error(ErrorCode::FormatError, "census needs a single-channel image");
  const int w = img.width();
  const int h = img.height();
  const int r = window / 2;
  // Edge-replicated copy so the window never needs clamping.
  Raster<std::uint8_t> padded(h + 2 * r, w + 2 * r);
  for (int v = 0; v < h + 2 * r; ++v) {
    const int sv = std::clamp(v - r, 0, h - 1);
    for (int u = 0; u < w + 2 * r; ++u) padded(v, u) = img.at(std::clamp(u - r, 0, w - 1), sv);
  }
  CensusImage codes(h, w);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const std::uint8_t center = padded(v + r, u + r);
      std::uint64_t code = 0;
      int bit = 0;
      for (int dv = 0; dv < window; ++dv) {
        const std::uint8_t* row = padded.row(v + dv).data() + u;
        for (int du = 0; du < window; ++du) {
          if (du == r && dv == r) continue;
          code |= std::uint64_t{row[du] < center} << bit;
          ++bit;
        }
      }
      codes(v, u) = code;
    }
  }
  return codes;
}

namespace {

// sign = +1 matches left(u) against right(u - d); sign = -1 matches right(u)
// against left(u + d).
MatchingCost hamming_volume(const CensusImage& base, const CensusImage& other, int sign, const SgbmParams& params) {
  if (base.rows() != other.rows() || base.cols() != other.cols()) {
    throw Error(ErrorCode::ShapeError, "census images differ in size");
  }
  const int w = static_cast<int>(base.cols());
  const int h = static_cast<int>(base.rows());
  const int nd = params.num_disparities;
  const auto large = static_cast<std::uint8_t>(params.large_cost());
  MatchingCost volume(w, h, nd);
  parallel_for(0, h, params.jobs, [&](int v) {
    for (int u = 0; u < w; ++u) {
      std::uint8_t* out = volume.pixel(u, v);
      const std::uint64_t code = base(v, u);
      // Disparity indices [0, in_range) have a correspondence inside the other view.
      const int reach = sign > 0 ? u - params.min_disparity + 1 : w - u - params.min_disparity;
      const int in_range = std::clamp(reach, 0, nd);
      const std::uint64_t* row = other.row(v).data();
      for (int k = 0; k < in_range; ++k) {
        out[k] = static_cast<std::uint8_t>(std::popcount(code ^ row[u - sign * (params.min_disparity + k)]));
      }
      for (int k = in_range; k < nd; ++k) out[k] = large;
    }
  });
  return volume;
}

void check_cost_params(const SgbmParams& params) {
  if (params.num_disparities <= 0) throw Error(ErrorCode::ParamError, "num_disparities must be positive");
  if (params.block_size < 3 || params.block_size > 7 || params.block_size % 2 == 0) {
    throw Error(ErrorCode::ParamError, "block_size must be 3, 5 or 7");
  }
  if (params.min_disparity < 0) throw Error(ErrorCode::ParamError, "min_disparity must be >= 0");
}

}  // namespace

MatchingCost compute_cost_volume(const CensusImage& left, const CensusImage& right, const SgbmParams& params) {
  check_cost_params(params);
  return hamming_volume(left, right, +1, params);
}

MatchingCost compute_right_cost_volume(const CensusImage& left, const CensusImage& right, const SgbmParams& params) {
  check_cost_params(params);
  return hamming_volume(right, left, -1, params);
}

std::vector<Eigen::Vector2i> aggregation_directions(int num_paths) {
  if (num_paths != 4 && num_paths != 8) throw Error(ErrorCode::ParamError, "num_paths must be 4 or 8");
  std::vector<Eigen::Vector2i> dirs = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  if (num_paths == 8) {
    dirs.insert(dirs.end(), {{1, 1}, {-1, -1}, {1, -1}, {-1, 1}});
  }
  return dirs;
}

namespace {

template <typename Cost>
struct PathContext {
  const CostVolume<Cost>& cost;
  AggregatedCost& sum;
  int du;
  int dv;
  std::uint16_t p1;
  std::uint16_t p2;
};

// One 1-D scanline of the path recurrence, accumulated into ctx.sum. `prev`
// and `cur` have num_disparities + 2 slots; the outer slots are padding.
template <typename Cost>
void aggregate_scanline(const PathContext<Cost>& ctx, int u, int v, std::vector<std::uint16_t>& prev_buf,
                        std::vector<std::uint16_t>& cur_buf) {
  const int nd = ctx.cost.num_disparities;
  const int w = ctx.cost.width;
  const int h = ctx.cost.height;
  const auto pad = static_cast<std::uint16_t>(std::numeric_limits<std::uint16_t>::max() - ctx.p1);
  std::uint16_t* prev = prev_buf.data() + 1;
  std::uint16_t* cur = cur_buf.data() + 1;
  prev[-1] = prev[nd] = pad;
  cur[-1] = cur[nd] = pad;

  const Cost* c = ctx.cost.pixel(u, v);
  std::uint16_t* s = ctx.sum.pixel(u, v);
  std::uint16_t min_prev = std::numeric_limits<std::uint16_t>::max();
  for (int k = 0; k < nd; ++k) {
    prev[k] = c[k];
    s[k] = static_cast<std::uint16_t>(s[k] + prev[k]);
    min_prev = std::min(min_prev, prev[k]);
  }

  for (u += ctx.du, v += ctx.dv; u >= 0 && u < w && v >= 0 && v < h; u += ctx.du, v += ctx.dv) {
    c = ctx.cost.pixel(u, v);
    s = ctx.sum.pixel(u, v);
    const auto jump = static_cast<std::uint16_t>(min_prev + ctx.p2);
    std::uint16_t min_cur = std::numeric_limits<std::uint16_t>::max();
    for (int k = 0; k < nd; ++k) {
      const auto step = static_cast<std::uint16_t>(std::min(prev[k - 1], prev[k + 1]) + ctx.p1);
      const std::uint16_t best = std::min(std::min(prev[k], step), jump);
      cur[k] = static_cast<std::uint16_t>(c[k] + best - min_prev);
      min_cur = std::min(min_cur, cur[k]);
    }
    for (int k = 0; k < nd; ++k) s[k] = static_cast<std::uint16_t>(s[k] + cur[k]);
    min_prev = min_cur;
    std::swap(prev, cur);
  }
}

}  // namespace

template <typename Cost>
AggregatedCost aggregate_costs(const CostVolume<Cost>& volume, const SgbmParams& params) {
  const auto dirs = aggregation_directions(params.num_paths);
  if (params.p1 < 0 || params.p2 < 0) throw Error(ErrorCode::ParamError, "penalties must be non-negative");
  const int max_cost = volume.costs.size() > 0 ? int(volume.costs.maxCoeff()) : 0;
  // Per-path values never exceed max_cost + p2; a neighbour step adds p1 on top.
  const long long path_max = static_cast<long long>(max_cost) + params.p2;
  constexpr long long kLimit = std::numeric_limits<std::uint16_t>::max();
  if (params.num_paths * path_max > kLimit || path_max + params.p1 > kLimit) {
    throw Error(ErrorCode::ParamError, "penalties too large for 16-bit aggregated costs");
  }

  const int w = volume.width;
  const int h = volume.height;
  AggregatedCost sum(w, h, volume.num_disparities);
  for (const Eigen::Vector2i& dir : dirs) {
    const int du = dir.x();
    const int dv = dir.y();
    std::vector<Eigen::Vector2i> starts;
    for (int v = 0; v < h; ++v) {
      for (int u = 0; u < w; ++u) {
        const int pu = u - du;
        const int pv = v - dv;
        if (pu < 0 || pu >= w || pv < 0 || pv >= h) starts.emplace_back(u, v);
      }
    }
    const PathContext<Cost> ctx{volume, sum, du, dv, static_cast<std::uint16_t>(params.p1),
                          static_cast<std::uint16_t>(params.p2)};
    // Every pixel lies on exactly one scanline per direction, so scanlines
    // write disjoint pixels of `sum`.
    const int chunks = std::max(1, std::min<int>(static_cast<int>(starts.size()), params.jobs * 8));
    parallel_for(0, chunks, params.jobs, [&](int chunk) {
      std::vector<std::uint16_t> a(volume.num_disparities + 2), b(volume.num_disparities + 2);
      const std::size_t lo = starts.size() * chunk / chunks;
      const std::size_t hi = starts.size() * (chunk + 1) / chunks;
      for (std::size_t i = lo; i < hi; ++i) aggregate_scanline(ctx, starts[i].x(), starts[i].y(), a, b);
    });
  }
  return sum;
}

template AggregatedCost aggregate_costs(const MatchingCost&, const SgbmParams&);
template AggregatedCost aggregate_costs(const BlockCost&, const SgbmParams&);

BlockCost block_sum_costs(const MatchingCost& volume, int block, int jobs) {
  if (block < 1 || block % 2 == 0) throw Error(ErrorCode::ParamError, "block must be odd and positive");
  const int w = volume.width;
  const int h = volume.height;
  const int nd = volume.num_disparities;
  const int r = block / 2;
  if (static_cast<long long>(block) * block * (volume.costs.size() ? volume.costs.maxCoeff() : 0) > 65535) {
    throw Error(ErrorCode::ParamError, "block sums overflow 16-bit costs");
  }
  // Horizontal sums per row, then vertical sums over clamped row indices.
  BlockCost horizontal(w, h, nd);
  parallel_for(0, h, jobs, [&](int v) {
    for (int u = 0; u < w; ++u) {
      std::uint16_t* out = horizontal.pixel(u, v);
      for (int du = -r; du <= r; ++du) {
        const std::uint8_t* c = volume.pixel(std::clamp(u + du, 0, w - 1), v);
        for (int k = 0; k < nd; ++k) out[k] = static_cast<std::uint16_t>(out[k] + c[k]);
      }
    }
  });
  BlockCost summed(w, h, nd);
  parallel_for(0, h, jobs, [&](int v) {
    for (int dv = -r; dv <= r; ++dv) {
      const int sv = std::clamp(v + dv, 0, h - 1);
      for (int u = 0; u < w; ++u) {
        std::uint16_t* out = summed.pixel(u, v);
        const std::uint16_t* c = horizontal.pixel(u, sv);
        for (int k = 0; k < nd; ++k) out[k] = static_cast<std::uint16_t>(out[k] + c[k]);
      }
    }
  });
  return summed;
}

DisparityMap select_disparity(const AggregatedCost& aggregated, const SgbmParams& params) {
  const int w = aggregated.width;
  const int h = aggregated.height;
  const int nd = aggregated.num_disparities;
  const long long ratio = 100 + params.uniqueness_ratio;
  DisparityMap out(w, h);
  parallel_for(0, h, params.jobs, [&](int v) {
    for (int u = 0; u < w; ++u) {
      const std::uint16_t* s = aggregated.pixel(u, v);
      int best = 0;
      for (int k = 1; k < nd; ++k) {
        if (s[k] < s[best]) best = k;
      }
      const long long best_cost = s[best];
      bool unique = true;
      for (int k = 0; k < nd && unique; ++k) {
        if (std::abs(k - best) <= 1) continue;
        if (100LL * s[k] < ratio * best_cost) unique = false;
      }
      if (!unique) continue;
      double d = params.min_disparity + best;
      if (best > 0 && best < nd - 1) {
        const long long left = s[best - 1];
        const long long right = s[best + 1];
        const long long denom = left - 2 * best_cost + right;
        if (denom > 0) d += static_cast<double>(left - right) / (2.0 * static_cast<double>(denom));
      }
      out(u, v) = static_cast<float>(d);
    }
  });
  return out;
}

DisparityMap lr_consistency_filter(const DisparityMap& left, const DisparityMap& right, double max_diff) {
  if (left.width() != right.width() || left.height() != right.height()) {
    throw Error(ErrorCode::ShapeError, "left and right disparity maps differ in size");
  }
  DisparityMap out(left.width(), left.height());
  for (int v = 0; v < left.height(); ++v) {
    for (int u = 0; u < left.width(); ++u) {
      if (!left.valid(u, v)) continue;
      const float dl = left(u, v);
      const long ur = u - std::lround(dl);
      if (ur < 0 || ur >= right.width() || !right.valid(static_cast<int>(ur), v)) continue;
      if (std::abs(static_cast<double>(dl) - right(static_cast<int>(ur), v)) <= max_diff) out(u, v) = dl;
    }
  }
  return out;
}

DisparityMap speckle_filter(const DisparityMap& disp, int window, double range) {
  if (window < 0) throw Error(ErrorCode::ParamError, "speckle window must be >= 0");
  const int w = disp.width();
  const int h = disp.height();
  DisparityMap out = disp;
  if (window == 0) return out;
  Raster<int> label = Raster<int>::Constant(h, w, -1);
  std::vector<Eigen::Vector2i> stack;
  std::vector<Eigen::Vector2i> members;
  int next_label = 0;
  for (int v0 = 0; v0 < h; ++v0) {
    for (int u0 = 0; u0 < w; ++u0) {
      if (label(v0, u0) >= 0 || !disp.valid(u0, v0)) continue;
      members.clear();
      stack.assign(1, {u0, v0});
      label(v0, u0) = next_label;
      while (!stack.empty()) {
        const Eigen::Vector2i p = stack.back();
        stack.pop_back();
        members.push_back(p);
        const float dp = disp(p.x(), p.y());
        static constexpr int kOffsets[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        for (const auto& o : kOffsets) {
          const int qu = p.x() + o[0];
          const int qv = p.y() + o[1];
          if (qu < 0 || qu >= w || qv < 0 || qv >= h) continue;
          if (label(qv, qu) >= 0 || !disp.valid(qu, qv)) continue;
          if (std::abs(static_cast<double>(disp(qu, qv)) - dp) > range) continue;
          label(qv, qu) = next_label;
          stack.emplace_back(qu, qv);
        }
      }
      if (static_cast<int>(members.size()) < window) {
        for (const auto& p : members) out(p.x(), p.y()) = kInvalidDisparity;
      }
      ++next_label;
    }
  }
  return out;
}

SgbmResult sgbm_match(const StereoFrame& frame, const SgbmParams& params) {
  params.validate();
  frame.validate();
  if (frame.left.width() < params.min_disparity + params.num_disparities) {
    throw Error(ErrorCode::ParamError, "frame is narrower than the disparity search range");
  }
  const ImageBuffer left_gray = to_grayscale(frame.left);
  const ImageBuffer right_gray = to_grayscale(frame.right);
  const CensusImage left_codes = census_transform(left_gray, params.block_size);
  const CensusImage right_codes = census_transform(right_gray, params.block_size);

  auto match = [&](const MatchingCost& cost) {
    return select_disparity(aggregate_costs(block_sum_costs(cost, params.block_size, params.jobs), params), params);
  };
  SgbmResult result;
  result.left = match(compute_cost_volume(left_codes, right_codes, params));
  if (params.lr_check) {
    result.right = match(compute_right_cost_volume(left_codes, right_codes, params));
    result.left = lr_consistency_filter(result.left, result.right, params.lr_max_diff);
  }
  result.left = speckle_filter(result.left, params.speckle_window, params.speckle_range);
  return result;
}

DisparityMap sgbm_full(const StereoFrame& frame, const SgbmParams& params) { return sgbm_match(frame, params).left; }

}  // namespace arbor
