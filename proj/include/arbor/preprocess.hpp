#pragma once

#include "arbor/core.hpp"

namespace arbor {

struct PreprocessConfig {
  int denoise_radius = 2;
  double denoise_sigma = 1.0;
  bool equalize = true;

  void validate() const;
};

/// Luma = round(0.299 R + 0.587 G + 0.114 B). Single-channel input is returned unchanged.
ImageBuffer to_grayscale(const ImageBuffer& img);

/// Global histogram equalization. The remap is monotone non-decreasing; a
/// constant image is returned unchanged.
ImageBuffer equalize_contrast(const ImageBuffer& img);

/// Separable Gaussian blur with edge replication. Radius 0 is the identity.
ImageBuffer denoise(const ImageBuffer& img, const PreprocessConfig& cfg);

/// Normalized 1-D Gaussian weights of length 2 * radius + 1.
Eigen::VectorXd gaussian_kernel(int radius, double sigma);

/// grayscale -> equalize (optional) -> denoise.
ImageBuffer preprocess(const ImageBuffer& img, const PreprocessConfig& cfg);

}  // namespace arbor
