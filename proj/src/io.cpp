#include "arbor/io.hpp"

#include "json.hpp"
#include <png.h>

#include <bit>
#include <cctype>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

namespace arbor::io {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

[[noreturn]] void png_error_to_exception(png_structp, png_const_charp msg) {
  throw Error(ErrorCode::FormatError, std::string("png: ") + msg);
}

void png_warning_ignore(png_structp, png_const_charp) {}

Raster<float> to_file_values(const Raster<float>& values, bool (*valid)(float)) {
  return values.unaryExpr([valid](float x) { return valid(x) ? x : -1.0f; });
}

}  // namespace

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void atomic_write(const fs::path& path, std::string_view bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoError, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot rename into " + path.string());
  }
}

void atomic_write(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  atomic_write(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::vector<std::uint8_t> encode_png(const ImageBuffer& image, const TextChunks& text) {
  if (image.empty()) throw Error(ErrorCode::ShapeError, "cannot encode an empty image");
  std::vector<std::uint8_t> out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_to_exception,
                                            png_warning_ignore);
  png_infop info = png_create_info_struct(png);
  try {
    png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
    const int color = image.channels() == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY;
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()), static_cast<png_uint_32>(image.height()),
                 8, color, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    std::vector<png_text> chunks;
    for (const auto& [key, value] : text) {
      png_text t{};
      t.compression = PNG_TEXT_COMPRESSION_NONE;
      t.key = const_cast<char*>(key.c_str());
      t.text = const_cast<char*>(value.c_str());
      t.text_length = value.size();
      chunks.push_back(t);
    }
    if (!chunks.empty()) png_set_text(png, info, chunks.data(), static_cast<int>(chunks.size()));
    png_write_info(png, info);
    const auto& samples = image.samples();
    for (Eigen::Index r = 0; r < samples.rows(); ++r) {
      png_write_row(png, const_cast<png_bytep>(samples.row(r).data()));
    }
    png_write_end(png, nullptr);
  } catch (...) {
    png_destroy_write_struct(&png, &info);
    throw;
  }
  png_destroy_write_struct(&png, &info);
  return out;
}

void write_png(const fs::path& path, const ImageBuffer& image, const TextChunks& text) {
  atomic_write(path, encode_png(image, text));
}

ImageBuffer read_png(const fs::path& path) {
  const std::string bytes = read_text(path);
  if (bytes.size() < 8 || png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8) != 0) {
    throw Error(ErrorCode::FormatError, path.string() + " is not a PNG file");
  }
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    throw Error(ErrorCode::FormatError, path.string() + ": " + img.message);
  }
  const bool color = (img.format & PNG_FORMAT_FLAG_COLOR) != 0;
  img.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const int channels = color ? 3 : 1;
  ImageBuffer out(static_cast<int>(img.width), static_cast<int>(img.height), channels);
  if (!png_image_finish_read(&img, nullptr, out.samples().data(), 0, nullptr)) {
    png_image_free(&img);
    throw Error(ErrorCode::FormatError, path.string() + ": " + img.message);
  }
  return out;
}

std::vector<std::uint8_t> encode_pfm(const Raster<float>& values) {
  static_assert(std::endian::native == std::endian::little, "PFM writer assumes a little-endian host");
  std::ostringstream header;
  header << "Pf\n" << values.cols() << ' ' << values.rows() << "\n-1.0\n";
  const std::string h = header.str();
  std::vector<std::uint8_t> out(h.begin(), h.end());
  const std::size_t row_bytes = static_cast<std::size_t>(values.cols()) * sizeof(float);
  out.reserve(out.size() + row_bytes * static_cast<std::size_t>(values.rows()));
  for (Eigen::Index r = values.rows() - 1; r >= 0; --r) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(values.row(r).data());
    out.insert(out.end(), p, p + row_bytes);
  }
  return out;
}

Raster<float> decode_pfm(std::string_view bytes) {
  // Header: three whitespace-separated tokens after the magic, then a single
  // whitespace byte before the binary payload.
  std::size_t pos = 0;
  auto next_token = [&]() -> std::string_view {
    while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return bytes.substr(start, pos - start);
  };
  if (next_token() != "Pf") throw Error(ErrorCode::FormatError, "only single-channel PFM (Pf) is supported");
  long width = 0, height = 0;
  const auto w_tok = next_token();
  const auto h_tok = next_token();
  std::from_chars(w_tok.data(), w_tok.data() + w_tok.size(), width);
  std::from_chars(h_tok.data(), h_tok.data() + h_tok.size(), height);
  const std::string scale_tok(next_token());
  if (width <= 0 || height <= 0 || scale_tok.empty()) throw Error(ErrorCode::FormatError, "bad PFM header");
  const double scale = std::stod(scale_tok);
  if (scale >= 0.0) throw Error(ErrorCode::FormatError, "big-endian PFM is not supported");
  ++pos;
  const std::size_t row_bytes = static_cast<std::size_t>(width) * sizeof(float);
  if (bytes.size() - pos < row_bytes * static_cast<std::size_t>(height)) {
    throw Error(ErrorCode::FormatError, "truncated PFM payload");
  }
  Raster<float> values(height, width);
  for (long r = height - 1; r >= 0; --r) {
    std::memcpy(values.row(r).data(), bytes.data() + pos, row_bytes);
    pos += row_bytes;
  }
  return values;
}

void write_pfm(const fs::path& path, const DisparityMap& disp) {
  atomic_write(path, encode_pfm(to_file_values(disp.values, is_valid_disparity)));
}

void write_pfm(const fs::path& path, const DepthMap& depth) {
  atomic_write(path, encode_pfm(to_file_values(depth.values, is_valid_depth)));
}

DisparityMap read_disparity_pfm(const fs::path& path) {
  Raster<float> v = decode_pfm(read_text(path));
  return DisparityMap(v.unaryExpr([](float x) { return is_valid_disparity(x) ? x : kInvalidDisparity; }));
}

DepthMap read_depth_pfm(const fs::path& path) {
  Raster<float> v = decode_pfm(read_text(path));
  return DepthMap(v.unaryExpr([](float x) { return is_valid_depth(x) ? x : kInvalidDepth; }));
}

CameraCalibration calibration_from_json_text(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("calibration JSON: ") + e.what());
  }
  CameraCalibration c;
  try {
    c.fx = j.at("fx").get<double>();
    c.fy = j.at("fy").get<double>();
    c.cx = j.at("cx").get<double>();
    c.cy = j.at("cy").get<double>();
    c.baseline = j.at("baseline_m").get<double>();
    c.width = j.at("width").get<int>();
    c.height = j.at("height").get<int>();
    c.rectified = j.at("rectified").get<bool>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("calibration JSON: ") + e.what());
  }
  c.validate();
  return c;
}

std::string calibration_to_json_text(const CameraCalibration& c) {
  const json j = {{"fx", c.fx},         {"fy", c.fy},       {"cx", c.cx},
                  {"cy", c.cy},         {"baseline_m", c.baseline}, {"width", c.width},
                  {"height", c.height}, {"rectified", c.rectified}};
  return j.dump(2) + "\n";
}

CameraCalibration read_calibration(const fs::path& path) { return calibration_from_json_text(read_text(path)); }

void write_calibration(const fs::path& path, const CameraCalibration& calib) {
  atomic_write(path, calibration_to_json_text(calib));
}

}  // namespace arbor::io
