#include "arbor/core.hpp"

namespace arbor {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NoDepth: return "NoDepth";
    case ErrorCode::InvalidDepth: return "InvalidDepth";
    case ErrorCode::ShapeError: return "ShapeError";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::ParamError: return "ParamError";
    case ErrorCode::NoValidData: return "NoValidData";
    case ErrorCode::InsufficientDepth: return "InsufficientDepth";
    case ErrorCode::EmptyEval: return "EmptyEval";
    case ErrorCode::SpecError: return "SpecError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::FrameMismatch: return "FrameMismatch";
  }
  return "Unknown";
}

void CameraCalibration::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw Error(ErrorCode::ParamError, "focal lengths must be positive");
  if (!(baseline > 0.0)) throw Error(ErrorCode::ParamError, "baseline must be positive");
  if (width <= 0 || height <= 0) throw Error(ErrorCode::ParamError, "image size must be positive");
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
    throw Error(ErrorCode::ParamError, "principal point outside the image");
  }
}

ImageBuffer::ImageBuffer(int width, int height, int channels)
    : width_(width), height_(height), channels_(channels) {
  if (width <= 0 || height <= 0) throw Error(ErrorCode::ShapeError, "image size must be positive");
  if (channels != 1 && channels != 3) throw Error(ErrorCode::FormatError, "channels must be 1 or 3");
  samples_ = Raster<std::uint8_t>::Zero(height, static_cast<Eigen::Index>(width) * channels);
}

ImageBuffer::ImageBuffer(Raster<std::uint8_t> samples, int channels)
    : channels_(channels), samples_(std::move(samples)) {
  if (channels != 1 && channels != 3) throw Error(ErrorCode::FormatError, "channels must be 1 or 3");
  if (samples_.rows() <= 0 || samples_.cols() <= 0 || samples_.cols() % channels != 0) {
    throw Error(ErrorCode::ShapeError, "sample raster does not hold whole pixels");
  }
  width_ = static_cast<int>(samples_.cols() / channels);
  height_ = static_cast<int>(samples_.rows());
}

void StereoFrame::validate() const {
  calibration.validate();
  if (!calibration.rectified) throw Error(ErrorCode::ParamError, "stereo pair is not rectified");
  if (left.width() != right.width() || left.height() != right.height()) {
    throw Error(ErrorCode::ShapeError, "left and right images differ in size");
  }
  if (left.width() != calibration.width || left.height() != calibration.height) {
    throw Error(ErrorCode::ShapeError, "image size does not match calibration");
  }
}

DepthMap disparity_map_to_depth_map(const DisparityMap& disp, const CameraCalibration& calib) {
  if (disp.width() != calib.width || disp.height() != calib.height) {
    throw Error(ErrorCode::ShapeError, "disparity map size does not match calibration");
  }
  const float bf = static_cast<float>(calib.baseline * calib.fx);
  DepthMap depth;
  depth.values = disp.values.unaryExpr([bf](float d) {
    return (is_valid_disparity(d) && d > 0.0f) ? bf / d : kInvalidDepth;
  });
  return depth;
}

}  // namespace arbor
