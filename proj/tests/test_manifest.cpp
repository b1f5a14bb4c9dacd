#include "doctest.h"

#include "arbor/io.hpp"
#include "arbor/manifest.hpp"

#include <filesystem>

using namespace arbor;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "arbor_test_manifest" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ErrorCode parse_error(const std::string& text) {
  try {
    parse_manifest(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}

const char* kValid = R"({"frame_id": "f1", "width": 8, "height": 6, "instances": [
  {"instance_id": 2, "label": "branch", "score": 0.9, "bbox": [1, 1, 3, 4], "mask_file": "masks/2.png"}]})";

}  // namespace

TEST_CASE("tight bbox") {
  BinaryMask m = BinaryMask::Zero(6, 8);
  CHECK(tight_bbox(m) == BBox{});
  m(2, 3) = 1;
  CHECK(tight_bbox(m) == BBox{3, 2, 4, 3});
  CHECK(tight_bbox(m).area() == 1.0);
  m(4, 1) = 1;
  CHECK(tight_bbox(m) == BBox{1, 2, 4, 5});
}

TEST_CASE("parse valid manifest") {
  const MaskManifest m = parse_manifest(kValid);
  CHECK(m.frame_id == "f1");
  CHECK(m.width == 8);
  REQUIRE(m.instances.size() == 1);
  CHECK(m.instances[0].bbox == BBox{1, 1, 3, 4});
  CHECK(parse_manifest(manifest_to_json_text(m)).instances[0].mask_file == "masks/2.png");
  CHECK(parse_manifest(R"({"frame_id": 3, "width": 1, "height": 1, "instances": []})").frame_id == "3");
}

TEST_CASE("schema errors") {
  CHECK(parse_error("{") == ErrorCode::SchemaError);
  CHECK(parse_error("[]") == ErrorCode::SchemaError);
  CHECK(parse_error(R"({"width": 8, "height": 6, "instances": []})") == ErrorCode::SchemaError);
  CHECK(parse_error(R"({"frame_id": "a", "width": 0, "height": 6, "instances": []})") == ErrorCode::SchemaError);
  CHECK(parse_error(R"({"frame_id": "a", "width": 8, "height": 6, "instances": {}})") == ErrorCode::SchemaError);
  const std::string base = R"({"frame_id": "a", "width": 8, "height": 6, "instances": [)";
  auto one = [&](const std::string& inst) { return parse_error(base + inst + "]}"); };
  CHECK(one(R"({"label": "b", "score": 1, "bbox": [0,0,1,1], "mask_file": "m.png"})") == ErrorCode::SchemaError);
  CHECK(one(R"({"instance_id": 1, "label": "b", "score": 1.5, "bbox": [0,0,1,1], "mask_file": "m.png"})") ==
        ErrorCode::SchemaError);
  CHECK(one(R"({"instance_id": 1, "label": "b", "score": 1, "bbox": [0,0,1], "mask_file": "m.png"})") ==
        ErrorCode::SchemaError);
  CHECK(one(R"({"instance_id": 1, "label": "b", "score": 1, "bbox": [2,0,1,1], "mask_file": "m.png"})") ==
        ErrorCode::SchemaError);
  CHECK(one(R"({"instance_id": 1, "label": 4, "score": 1, "bbox": [0,0,1,1], "mask_file": "m.png"})") ==
        ErrorCode::SchemaError);
  CHECK(one(R"({"instance_id": 1, "label": "b", "score": 1, "bbox": [0,0,1,1], "mask_file": ""})") ==
        ErrorCode::SchemaError);
  const std::string dup = R"({"instance_id": 1, "label": "b", "score": 1, "bbox": [0,0,1,1], "mask_file": "m.png"})";
  CHECK(one(dup + "," + dup) == ErrorCode::SchemaError);
  try {
    parse_manifest(base + R"({"instance_id": "x"}]})");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("instances[0].instance_id") != std::string::npos);
  }
}

TEST_CASE("write and load round trip") {
  const fs::path dir = fresh_dir("roundtrip");
  BinaryMask a = BinaryMask::Zero(6, 8);
  a.block(1, 2, 3, 2).setOnes();
  BinaryMask b = BinaryMask::Zero(6, 8);
  b(5, 7) = 1;
  const std::vector<SegmentMask> masks = {make_segment(4, a, 0.75), make_segment(9, b, 0.5, "trunk")};
  write_frame_masks(dir, "frame_a", 8, 6, masks);
  const FrameMasks loaded = load_frame_masks(dir / "manifest.json");
  CHECK(loaded.manifest.frame_id == "frame_a");
  REQUIRE(loaded.masks.size() == 2);
  CHECK((loaded.masks[0].mask == a).all());
  CHECK(loaded.masks[0].bbox == BBox{2, 1, 4, 4});
  CHECK(loaded.masks[1].label == "trunk");
  CHECK(loaded.masks[1].score == 0.5);

  const fs::path empty = fresh_dir("empty");
  write_frame_masks(empty, "e", 8, 6, {});
  CHECK(load_frame_masks(empty / "manifest.json").masks.empty());
  CHECK_THROWS_AS(write_frame_masks(dir, "x", 9, 6, masks), Error);
}

TEST_CASE("load rejects inconsistent masks") {
  auto expect_schema = [](const fs::path& manifest) {
    try {
      load_frame_masks(manifest);
      FAIL("expected SchemaError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::SchemaError);
    }
  };
  const fs::path dir = fresh_dir("bad");
  io::atomic_write(dir / "manifest.json", std::string_view(kValid));
  expect_schema(dir / "manifest.json");

  fs::create_directories(dir / "masks");
  ImageBuffer png(8, 6, 1);
  png.samples().block(1, 1, 3, 2).setConstant(255);
  io::write_png(dir / "masks" / "2.png", png);
  CHECK(load_frame_masks(dir / "manifest.json").masks.size() == 1);

  png.at(5, 5) = 200;
  io::write_png(dir / "masks" / "2.png", png);
  expect_schema(dir / "manifest.json");

  io::write_png(dir / "masks" / "2.png", ImageBuffer(7, 6, 1));
  expect_schema(dir / "manifest.json");

  io::write_png(dir / "masks" / "2.png", ImageBuffer(8, 6, 3));
  expect_schema(dir / "manifest.json");

  expect_schema(dir / "nothing.json");
}
