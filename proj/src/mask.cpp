#include "arbor/mask.hpp"

namespace arbor {

BBox tight_bbox(const BinaryMask& mask) {
  int u_min = static_cast<int>(mask.cols());
  int v_min = static_cast<int>(mask.rows());
  int u_max = -1;
  int v_max = -1;
  for (Eigen::Index v = 0; v < mask.rows(); ++v) {
    for (Eigen::Index u = 0; u < mask.cols(); ++u) {
      if (!mask(v, u)) continue;
      u_min = std::min(u_min, static_cast<int>(u));
      v_min = std::min(v_min, static_cast<int>(v));
      u_max = std::max(u_max, static_cast<int>(u));
      v_max = std::max(v_max, static_cast<int>(v));
    }
  }
  if (u_max < 0) return {};
  return {double(u_min), double(v_min), double(u_max + 1), double(v_max + 1)};
}

SegmentMask make_segment(std::int64_t instance_id, BinaryMask mask, double score, std::string label) {
  SegmentMask s;
  s.instance_id = instance_id;
  s.label = std::move(label);
  s.score = score;
  s.bbox = tight_bbox(mask);
  s.mask = std::move(mask);
  return s;
}

}  // namespace arbor
