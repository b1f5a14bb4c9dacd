#pragma once

#include "arbor/core.hpp"

namespace arbor {

struct WlsParams {
  double lambda = 8000.0;
  double sigma_color = 1.0;  // on guide intensities normalized to [0, 1]
  int iterations = 25;       // Gauss-Seidel sweeps

  void validate() const;
};

using ConfidenceMap = Raster<float>;

/// 1 where the left disparity is valid and agrees with the right view within
/// max_diff (same rule as lr_consistency_filter), 0 elsewhere.
ConfidenceMap confidence_from_lr(const DisparityMap& left, const DisparityMap& right, double max_diff);

/// Edge weight between two guide intensities (0..255).
inline double wls_weight(double a, double b, double sigma_color) {
  return std::exp(-std::abs(a - b) / 255.0 / sigma_color);
}

/// Holes replaced by the nearest valid value on the same row (ties take the
/// smaller disparity); rows without any valid pixel copy the nearest filled row.
/// Throws NoValidData when nothing is valid.
Raster<double> scanline_fill(const DisparityMap& disp);

/// sum_p c(p) (x(p) - d(p))^2 + lambda * sum_{p~q} w(p,q) (x(p) - x(q))^2 over
/// 4-connected pairs. Invalid disparities contribute no data term.
double wls_energy(const Raster<double>& x, const DisparityMap& disp, const ImageBuffer& guide,
                  const ConfidenceMap& conf, const WlsParams& params);

/// Minimizes wls_energy by `iterations` Gauss-Seidel sweeps starting from the
/// scanline-filled input. The result is defined on every pixel.
DisparityMap wls_refine(const DisparityMap& disp, const ImageBuffer& guide, const ConfidenceMap& conf,
                        const WlsParams& params);

}  // namespace arbor
