#pragma once

#include "arbor/core.hpp"

#include <cstdint>
#include <string>

namespace arbor {

/// Axis-aligned box in pixel-edge coordinates: a mask pixel (u, v) spans
/// [u, u + 1) x [v, v + 1), so the tight box of a single pixel has area 1.
struct BBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double area() const { return std::max(0.0, x_max - x_min) * std::max(0.0, y_max - y_min); }
  friend bool operator==(const BBox&, const BBox&) = default;
};

/// Binary raster, 1 = instance pixel.
using BinaryMask = Raster<std::uint8_t>;

struct SegmentMask {
  std::int64_t instance_id = 0;
  std::string label = "branch";
  double score = 1.0;
  BBox bbox;
  BinaryMask mask;

  int width() const { return static_cast<int>(mask.cols()); }
  int height() const { return static_cast<int>(mask.rows()); }
};

/// Tight box of the set pixels; all-zero box for an empty mask.
BBox tight_bbox(const BinaryMask& mask);

/// Builds a SegmentMask whose bbox is the tight box of `mask`.
SegmentMask make_segment(std::int64_t instance_id, BinaryMask mask, double score = 1.0, std::string label = "branch");

}  // namespace arbor
