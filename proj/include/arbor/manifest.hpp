#pragma once

#include "arbor/mask.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace arbor {

struct ManifestInstance {
  std::int64_t instance_id = 0;
  std::string label;
  double score = 0.0;
  BBox bbox;
  std::string mask_file;  // relative to the manifest's directory
};

/// Per-frame mask exchange manifest:
/// {frame_id, width, height, instances: [{instance_id, label, score, bbox, mask_file}]}
/// with bbox = [x_min, y_min, x_max, y_max] in pixel-edge coordinates.
struct MaskManifest {
  std::string frame_id;
  int width = 0;
  int height = 0;
  std::vector<ManifestInstance> instances;
};

struct FrameMasks {
  MaskManifest manifest;
  std::vector<SegmentMask> masks;  // manifest order
};

/// Structural validation only; throws SchemaError naming the offending field.
MaskManifest parse_manifest(std::string_view json_text);
std::string manifest_to_json_text(const MaskManifest& manifest);

/// Parses the manifest and loads every mask PNG (pixels >= 128 are set).
/// Missing or mis-sized mask files and non-tight boxes raise SchemaError.
FrameMasks load_frame_masks(const std::filesystem::path& manifest_path);

/// Writes `<dir>/manifest.json` and `<dir>/masks/<instance_id>.png`.
void write_frame_masks(const std::filesystem::path& dir, const std::string& frame_id, int width, int height,
                       const std::vector<SegmentMask>& masks);

}  // namespace arbor
