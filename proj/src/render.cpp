#include "arbor/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace arbor {

std::array<std::uint8_t, 3> colormap(double t) {
  static constexpr std::array<std::array<double, 3>, 5> kStops = {{
      {48, 18, 59}, {70, 134, 251}, {27, 229, 181}, {251, 185, 56}, {122, 4, 3},
  }};
  t = std::clamp(std::isfinite(t) ? t : 0.0, 0.0, 1.0);
  const double x = t * (kStops.size() - 1);
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(x), kStops.size() - 2);
  const double f = x - static_cast<double>(i);
  std::array<std::uint8_t, 3> rgb{};
  for (std::size_t c = 0; c < 3; ++c) {
    rgb[c] = static_cast<std::uint8_t>(std::lround((1.0 - f) * kStops[i][c] + f * kStops[i + 1][c]));
  }
  return rgb;
}

namespace {

std::string format_value(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

// Keys are identical across calls so re-runs produce byte-identical PNGs.
io::TextChunks legend_text(double lo, double hi, const char* unit, const char* direction) {
  return {{"legend_min", format_value(lo) + " " + unit},
          {"legend_max", format_value(hi) + " " + unit},
          {"legend", std::string("bottom strip runs ") + direction},
          {"colormap", "piecewise-linear 5-stop (indigo, blue, cyan-green, orange, dark red)"}};
}

void value_range(const Raster<float>& values, bool (*valid)(float), double& lo, double& hi) {
  lo = std::numeric_limits<double>::infinity();
  hi = -std::numeric_limits<double>::infinity();
  for (float x : values.reshaped()) {
    if (!valid(x)) continue;
    lo = std::min(lo, double(x));
    hi = std::max(hi, double(x));
  }
  if (!std::isfinite(lo)) lo = hi = 0.0;
}

}  // namespace

Rendering colorize(const Raster<float>& values, bool (*valid)(float), double lo, double hi, const char* unit) {
  const int w = static_cast<int>(values.cols());
  const int h = static_cast<int>(values.rows());
  const double span = hi > lo ? hi - lo : 1.0;
  Rendering r{ImageBuffer(w, h + kLegendHeight, 3), legend_text(lo, hi, unit, "from legend_min (left) to legend_max (right)")};
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const float x = values(v, u);
      if (!valid(x)) continue;
      const auto rgb = colormap((x - lo) / span);
      for (int c = 0; c < 3; ++c) r.image.at(u, v, c) = rgb[static_cast<std::size_t>(c)];
    }
  }
  for (int u = 0; u < w; ++u) {
    const auto rgb = colormap(w > 1 ? double(u) / (w - 1) : 0.0);
    for (int v = h + 2; v < h + kLegendHeight; ++v) {
      for (int c = 0; c < 3; ++c) r.image.at(u, v, c) = rgb[static_cast<std::size_t>(c)];
    }
  }
  return r;
}

Rendering render_disparity(const DisparityMap& disp) {
  double lo = 0.0;
  double hi = 0.0;
  value_range(disp.values, is_valid_disparity, lo, hi);
  return colorize(disp.values, is_valid_disparity, lo, hi, "px");
}

Rendering render_depth_overlay(const DepthMap& depth, std::span<const SegmentMask> masks) {
  double lo = 0.0;
  double hi = 0.0;
  value_range(depth.values, is_valid_depth, lo, hi);
  // Negate so that near surfaces land on the warm end.
  const Raster<float> negated = depth.values.unaryExpr([](float z) { return is_valid_depth(z) ? -z : kInvalidDepth; });
  Rendering r = colorize(negated, [](float x) { return std::isfinite(x); }, -hi, -lo, "m");
  r.legend["legend_min"] = format_value(hi) + " m";
  r.legend["legend_max"] = format_value(lo) + " m";
  for (const auto& m : masks) {
    if (m.width() != depth.width() || m.height() != depth.height()) {
      throw Error(ErrorCode::ShapeError, "mask and depth map sizes differ");
    }
    for (int v = 0; v < m.height(); ++v) {
      for (int u = 0; u < m.width(); ++u) {
        if (!m.mask(v, u)) continue;
        const bool edge = u == 0 || v == 0 || u + 1 == m.width() || v + 1 == m.height() || !m.mask(v, u - 1) ||
                          !m.mask(v, u + 1) || !m.mask(v - 1, u) || !m.mask(v + 1, u);
        if (!edge) continue;
        for (int c = 0; c < 3; ++c) r.image.at(u, v, c) = 255;
      }
    }
  }
  return r;
}

}  // namespace arbor
