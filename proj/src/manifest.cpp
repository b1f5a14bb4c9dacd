#include "arbor/manifest.hpp"

#include "arbor/io.hpp"
#include "json.hpp"

#include <set>

namespace arbor {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void schema_fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::SchemaError, where + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) schema_fail(where, std::string("missing key '") + key + "'");
  return obj.at(key);
}

}  // namespace

MaskManifest parse_manifest(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    schema_fail("manifest", e.what());
  }
  if (!j.is_object()) schema_fail("manifest", "top level must be an object");
  MaskManifest m;
  const json& frame_id = require(j, "frame_id", "manifest");
  if (frame_id.is_string()) m.frame_id = frame_id.get<std::string>();
  else if (frame_id.is_number_integer()) m.frame_id = std::to_string(frame_id.get<long long>());
  else schema_fail("frame_id", "must be a string or integer");
  const json& width = require(j, "width", "manifest");
  const json& height = require(j, "height", "manifest");
  if (!width.is_number_integer() || !height.is_number_integer() || width.get<int>() <= 0 || height.get<int>() <= 0) {
    schema_fail("width/height", "must be positive integers");
  }
  m.width = width.get<int>();
  m.height = height.get<int>();
  const json& instances = require(j, "instances", "manifest");
  if (!instances.is_array()) schema_fail("instances", "must be an array");

  std::set<std::int64_t> seen;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const std::string where = "instances[" + std::to_string(i) + "]";
    const json& item = instances[i];
    ManifestInstance inst;
    const json& id = require(item, "instance_id", where);
    if (!id.is_number_integer()) schema_fail(where + ".instance_id", "must be an integer");
    inst.instance_id = id.get<std::int64_t>();
    if (!seen.insert(inst.instance_id).second) schema_fail(where + ".instance_id", "duplicate id");
    const json& label = require(item, "label", where);
    if (!label.is_string()) schema_fail(where + ".label", "must be a string");
    inst.label = label.get<std::string>();
    const json& score = require(item, "score", where);
    if (!score.is_number() || score.get<double>() < 0.0 || score.get<double>() > 1.0) {
      schema_fail(where + ".score", "must be a number in [0, 1]");
    }
    inst.score = score.get<double>();
    const json& bbox = require(item, "bbox", where);
    if (!bbox.is_array() || bbox.size() != 4 ||
        !std::all_of(bbox.begin(), bbox.end(), [](const json& x) { return x.is_number(); })) {
      schema_fail(where + ".bbox", "must be [x_min, y_min, x_max, y_max]");
    }
    inst.bbox = {bbox[0].get<double>(), bbox[1].get<double>(), bbox[2].get<double>(), bbox[3].get<double>()};
    if (inst.bbox.x_min > inst.bbox.x_max || inst.bbox.y_min > inst.bbox.y_max) {
      schema_fail(where + ".bbox", "min exceeds max");
    }
    const json& mask_file = require(item, "mask_file", where);
    if (!mask_file.is_string() || mask_file.get<std::string>().empty()) {
      schema_fail(where + ".mask_file", "must be a non-empty string");
    }
    inst.mask_file = mask_file.get<std::string>();
    m.instances.push_back(std::move(inst));
  }
  return m;
}

std::string manifest_to_json_text(const MaskManifest& m) {
  json instances = json::array();
  for (const auto& inst : m.instances) {
    instances.push_back({{"instance_id", inst.instance_id},
                         {"label", inst.label},
                         {"score", inst.score},
                         {"bbox", {inst.bbox.x_min, inst.bbox.y_min, inst.bbox.x_max, inst.bbox.y_max}},
                         {"mask_file", inst.mask_file}});
  }
  const json j = {{"frame_id", m.frame_id}, {"width", m.width}, {"height", m.height}, {"instances", instances}};
  return j.dump(2) + "\n";
}

FrameMasks load_frame_masks(const fs::path& manifest_path) {
  std::string text;
  try {
    text = io::read_text(manifest_path);
  } catch (const Error& e) {
    schema_fail(manifest_path.string(), e.what());
  }
  FrameMasks frame;
  frame.manifest = parse_manifest(text);
  const fs::path base = manifest_path.parent_path();
  for (const auto& inst : frame.manifest.instances) {
    const fs::path file = base / inst.mask_file;
    const std::string where = "instance " + std::to_string(inst.instance_id);
    if (!fs::is_regular_file(file)) schema_fail(where, "mask file not found: " + file.string());
    ImageBuffer png;
    try {
      png = io::read_png(file);
    } catch (const Error& e) {
      schema_fail(where, e.what());
    }
    if (png.channels() != 1) schema_fail(where, "mask PNG must be 8-bit grayscale");
    if (png.width() != frame.manifest.width || png.height() != frame.manifest.height) {
      schema_fail(where, "mask size differs from manifest width/height");
    }
    BinaryMask mask = (png.samples() >= std::uint8_t{128}).cast<std::uint8_t>();
    SegmentMask seg = make_segment(inst.instance_id, std::move(mask), inst.score, inst.label);
    if (!(seg.bbox == inst.bbox)) schema_fail(where, "bbox is not the tight box of the mask");
    frame.masks.push_back(std::move(seg));
  }
  return frame;
}

void write_frame_masks(const fs::path& dir, const std::string& frame_id, int width, int height,
                       const std::vector<SegmentMask>& masks) {
  fs::create_directories(dir / "masks");
  MaskManifest m;
  m.frame_id = frame_id;
  m.width = width;
  m.height = height;
  for (const auto& seg : masks) {
    if (seg.width() != m.width || seg.height() != m.height) {
      throw Error(ErrorCode::ShapeError, "mask size differs from the frame size");
    }
    ManifestInstance inst{seg.instance_id, seg.label, seg.score, seg.bbox,
                          "masks/" + std::to_string(seg.instance_id) + ".png"};
    io::write_png(dir / inst.mask_file, ImageBuffer((seg.mask.cast<int>() * 255).cast<std::uint8_t>(), 1));
    m.instances.push_back(std::move(inst));
  }
  io::atomic_write(dir / "manifest.json", manifest_to_json_text(m));
}

}  // namespace arbor
