#pragma once

#include "arbor/core.hpp"
#include "arbor/io.hpp"
#include "arbor/mask.hpp"

#include <array>
#include <span>

namespace arbor {

/// Five-stop piecewise-linear colormap, t in [0, 1]:
///   0.00 (48, 18, 59)   dark indigo
///   0.25 (70, 134, 251) blue
///   0.50 (27, 229, 181) cyan-green
///   0.75 (251, 185, 56) orange
///   1.00 (122, 4, 3)    dark red
/// Invalid pixels are black.
std::array<std::uint8_t, 3> colormap(double t);

inline constexpr int kLegendHeight = 16;

struct Rendering {
  ImageBuffer image;       // height + kLegendHeight rows, RGB
  io::TextChunks legend;   // value range of the legend strip
};

/// Maps [lo, hi] onto the colormap (values outside are clamped) and appends a
/// legend strip running from lo (left) to hi (right).
Rendering colorize(const Raster<float>& values, bool (*valid)(float), double lo, double hi, const char* unit);

/// Disparity rendering over the valid value range (near = warm).
Rendering render_disparity(const DisparityMap& disp);

/// Depth rendering with near = warm and mask outlines drawn in white.
Rendering render_depth_overlay(const DepthMap& depth, std::span<const SegmentMask> masks);

}  // namespace arbor
