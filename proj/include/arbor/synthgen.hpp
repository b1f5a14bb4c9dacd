#pragma once

#include "arbor/core.hpp"
#include "arbor/mask.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace arbor {

/// Fronto-parallel capsule: a segment of `length` pixels through `center`
/// at `angle_deg`, thickened by `radius` pixels.
struct BranchSpec {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double radius = 0.0;
  double angle_deg = 0.0;
  double length = 0.0;
  double depth = 0.0;  // meters

  bool contains(double x, double y) const;
};

struct SceneSpec {
  CameraCalibration calib;
  double background_depth = 5.0;
  std::vector<BranchSpec> branches;
  std::uint64_t texture_seed = 1;
  double noise_sigma = 0.0;

  /// Throws SpecError on any violated invariant.
  void validate() const;
};

struct SyntheticScene {
  StereoFrame frame;
  DisparityMap gt_disparity;        // left view
  BinaryMask gt_occlusion;          // left pixels with no visible match in the right view
  std::vector<SegmentMask> masks;   // one per branch, instance_id = index + 1
  std::vector<double> branch_depths;
};

/// Intensity bands of the synthetic textures; branches are brighter than the
/// background so the guide image carries an edge at every branch boundary.
inline constexpr int kBackgroundTextureMax = 110;
inline constexpr int kBranchTextureMin = 145;

SyntheticScene render_scene(const SceneSpec& spec);

/// One scene per depth, each with a single centered branch of fixed physical
/// size; scene i uses texture seed base_seed + i.
std::vector<SceneSpec> range_protocol(const CameraCalibration& calib, const std::vector<double>& depths,
                                      std::uint64_t base_seed = 2024, double noise_sigma = 2.0);

std::string scene_to_json_text(const SceneSpec& spec);
SceneSpec scene_from_json_text(const std::string& text);

}  // namespace arbor
