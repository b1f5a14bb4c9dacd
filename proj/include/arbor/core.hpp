#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace arbor {

/// Dense row-major raster; row index is v, column index is u.
template <typename Scalar>
using Raster = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class ErrorCode {
  NoDepth,
  InvalidDepth,
  ShapeError,
  FormatError,
  ParamError,
  NoValidData,
  InsufficientDepth,
  EmptyEval,
  SpecError,
  IoError,
  SchemaError,
  FrameMismatch,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Pinhole intrinsics of the (left) rectified camera plus the stereo baseline.
struct CameraCalibration {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  double baseline = 0.0;  // meters
  int width = 0;
  int height = 0;
  bool rectified = true;

  /// Throws ParamError when any invariant is violated.
  void validate() const;
};

/// 8-bit image, `channels` interleaved samples per pixel. The raster has
/// `height` rows and `width * channels` columns.
class ImageBuffer {
 public:
  ImageBuffer() = default;
  ImageBuffer(int width, int height, int channels);
  ImageBuffer(Raster<std::uint8_t> samples, int channels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  bool empty() const noexcept { return width_ == 0; }

  std::uint8_t& at(int u, int v, int c = 0) { return samples_(v, u * channels_ + c); }
  std::uint8_t at(int u, int v, int c = 0) const { return samples_(v, u * channels_ + c); }

  const Raster<std::uint8_t>& samples() const noexcept { return samples_; }
  Raster<std::uint8_t>& samples() noexcept { return samples_; }

  friend bool operator==(const ImageBuffer& a, const ImageBuffer& b) {
    return a.channels_ == b.channels_ && a.width_ == b.width_ && a.height_ == b.height_ &&
           (a.samples_ == b.samples_).all();
  }

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  Raster<std::uint8_t> samples_;
};

struct StereoFrame {
  ImageBuffer left;
  ImageBuffer right;
  CameraCalibration calibration;

  /// Checks rectification flag and that both views match the calibration size.
  void validate() const;
};

inline constexpr float kInvalidDisparity = -1.0f;

inline bool is_valid_disparity(float d) { return std::isfinite(d) && d >= 0.0f; }

/// Per-pixel disparity in pixels; invalid pixels hold kInvalidDisparity.
struct DisparityMap {
  Raster<float> values;

  DisparityMap() = default;
  explicit DisparityMap(Raster<float> v) : values(std::move(v)) {}
  DisparityMap(int width, int height, float fill = kInvalidDisparity)
      : values(Raster<float>::Constant(height, width, fill)) {}

  int width() const noexcept { return static_cast<int>(values.cols()); }
  int height() const noexcept { return static_cast<int>(values.rows()); }
  float operator()(int u, int v) const { return values(v, u); }
  float& operator()(int u, int v) { return values(v, u); }
  bool valid(int u, int v) const { return is_valid_disparity(values(v, u)); }
};

inline const float kInvalidDepth = std::numeric_limits<float>::quiet_NaN();

inline bool is_valid_depth(float z) { return std::isfinite(z) && z > 0.0f; }

/// Per-pixel metric depth in meters; invalid pixels are NaN in memory.
struct DepthMap {
  Raster<float> values;

  DepthMap() = default;
  explicit DepthMap(Raster<float> v) : values(std::move(v)) {}
  DepthMap(int width, int height) : values(Raster<float>::Constant(height, width, kInvalidDepth)) {}

  int width() const noexcept { return static_cast<int>(values.cols()); }
  int height() const noexcept { return static_cast<int>(values.rows()); }
  float operator()(int u, int v) const { return values(v, u); }
  float& operator()(int u, int v) { return values(v, u); }
  bool valid(int u, int v) const { return is_valid_depth(values(v, u)); }
};

using Point3D = Eigen::Vector3d;

/// z = baseline * fx / d. Throws NoDepth for d <= 0 or non-finite d.
template <typename Scalar>
Scalar disparity_to_depth(Scalar d, const CameraCalibration& calib) {
  if (!std::isfinite(d) || d <= Scalar(0)) {
    throw Error(ErrorCode::NoDepth, "disparity " + std::to_string(static_cast<double>(d)));
  }
  return static_cast<Scalar>(calib.baseline * calib.fx) / d;
}

template <typename Scalar>
Scalar depth_to_disparity(Scalar z, const CameraCalibration& calib) {
  if (!std::isfinite(z) || z <= Scalar(0)) {
    throw Error(ErrorCode::InvalidDepth, "depth " + std::to_string(static_cast<double>(z)));
  }
  return static_cast<Scalar>(calib.baseline * calib.fx) / z;
}

template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> back_project(Scalar u, Scalar v, Scalar z, const CameraCalibration& calib) {
  if (!std::isfinite(z) || z <= Scalar(0)) {
    throw Error(ErrorCode::InvalidDepth, "depth " + std::to_string(static_cast<double>(z)));
  }
  const auto cx = static_cast<Scalar>(calib.cx);
  const auto cy = static_cast<Scalar>(calib.cy);
  return {(u - cx) * z / static_cast<Scalar>(calib.fx), (v - cy) * z / static_cast<Scalar>(calib.fy), z};
}

/// Element-wise triangulation; invalid or non-positive disparities map to invalid depth.
DepthMap disparity_map_to_depth_map(const DisparityMap& disp, const CameraCalibration& calib);

}  // namespace arbor
