#include "arbor/preprocess.hpp"

#include <array>
#include <cmath>

namespace arbor {

void PreprocessConfig::validate() const {
  if (denoise_radius < 0) throw Error(ErrorCode::ParamError, "denoise_radius must be >= 0");
  if (denoise_radius > 0 && !(denoise_sigma > 0.0)) {
    throw Error(ErrorCode::ParamError, "denoise_sigma must be positive when radius > 0");
  }
}

ImageBuffer to_grayscale(const ImageBuffer& img) {
  if (img.channels() == 1) return img;
  if (img.channels() != 3) throw Error(ErrorCode::FormatError, "expected 1 or 3 channels");
  ImageBuffer out(img.width(), img.height(), 1);
  for (int v = 0; v < img.height(); ++v) {
    for (int u = 0; u < img.width(); ++u) {
      const double luma = 0.299 * img.at(u, v, 0) + 0.587 * img.at(u, v, 1) + 0.114 * img.at(u, v, 2);
      out.at(u, v) = static_cast<std::uint8_t>(std::clamp(std::lround(luma), 0L, 255L));
    }
  }
  return out;
}

ImageBuffer equalize_contrast(const ImageBuffer& img) {
  if (img.channels() != 1) throw Error(ErrorCode::FormatError, "equalization needs a single-channel image");
  std::array<long long, 256> cdf{};
  for (auto s : img.samples().reshaped()) ++cdf[s];
  for (std::size_t i = 1; i < cdf.size(); ++i) cdf[i] += cdf[i - 1];
  const long long total = cdf.back();
  long long cdf_min = 0;
  for (auto c : cdf) {
    if (c > 0) {
      cdf_min = c;
      break;
    }
  }
  if (total == cdf_min) return img;

  std::array<std::uint8_t, 256> lut{};
  for (std::size_t i = 0; i < lut.size(); ++i) {
    const double scaled = static_cast<double>(cdf[i] - cdf_min) / static_cast<double>(total - cdf_min) * 255.0;
    lut[i] = static_cast<std::uint8_t>(std::clamp(std::lround(scaled), 0L, 255L));
  }
  ImageBuffer out = img;
  out.samples() = img.samples().unaryExpr([&lut](std::uint8_t s) { return lut[s]; });
  return out;
}

Eigen::VectorXd gaussian_kernel(int radius, double sigma) {
  Eigen::VectorXd k(2 * radius + 1);
  for (int i = -radius; i <= radius; ++i) k(i + radius) = std::exp(-0.5 * i * i / (sigma * sigma));
  return k / k.sum();
}

ImageBuffer denoise(const ImageBuffer& img, const PreprocessConfig& cfg) {
  cfg.validate();
  if (img.channels() != 1) throw Error(ErrorCode::FormatError, "denoise needs a single-channel image");
  if (cfg.denoise_radius == 0) return img;

  const int r = cfg.denoise_radius;
  const Eigen::VectorXd k = gaussian_kernel(r, cfg.denoise_sigma);
  const int w = img.width();
  const int h = img.height();
  const Raster<double> src = img.samples().cast<double>();

  Raster<double> horiz(h, w);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k(i + r) * src(v, std::clamp(u + i, 0, w - 1));
      horiz(v, u) = acc;
    }
  }
  ImageBuffer out(w, h, 1);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k(i + r) * horiz(std::clamp(v + i, 0, h - 1), u);
      out.at(u, v) = static_cast<std::uint8_t>(std::clamp(std::lround(acc), 0L, 255L));
    }
  }
  return out;
}

ImageBuffer preprocess(const ImageBuffer& img, const PreprocessConfig& cfg) {
  ImageBuffer gray = to_grayscale(img);
  if (cfg.equalize) gray = equalize_contrast(gray);
  return denoise(gray, cfg);
}

}  // namespace arbor
