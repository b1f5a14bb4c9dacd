#pragma once

#include "arbor/core.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace arbor::io {

using TextChunks = std::map<std::string, std::string>;

/// Reads an 8-bit grayscale or RGB PNG. Palette/alpha/16-bit inputs are
/// converted to 8-bit gray or RGB.
ImageBuffer read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const ImageBuffer& image, const TextChunks& text = {});
std::vector<std::uint8_t> encode_png(const ImageBuffer& image, const TextChunks& text = {});

/// Little-endian grayscale PFM ("Pf", scale -1.0), rows stored bottom-to-top.
/// Invalid pixels are written as -1.0 and read back as the in-memory sentinel.
void write_pfm(const std::filesystem::path& path, const DisparityMap& disp);
void write_pfm(const std::filesystem::path& path, const DepthMap& depth);
DisparityMap read_disparity_pfm(const std::filesystem::path& path);
DepthMap read_depth_pfm(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_pfm(const Raster<float>& values);
Raster<float> decode_pfm(std::string_view bytes);

/// JSON object with fx, fy, cx, cy, baseline_m, width, height, rectified.
CameraCalibration read_calibration(const std::filesystem::path& path);
void write_calibration(const std::filesystem::path& path, const CameraCalibration& calib);
CameraCalibration calibration_from_json_text(std::string_view text);
std::string calibration_to_json_text(const CameraCalibration& calib);

std::string read_text(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`.
void atomic_write(const std::filesystem::path& path, std::string_view bytes);
void atomic_write(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

}  // namespace arbor::io
