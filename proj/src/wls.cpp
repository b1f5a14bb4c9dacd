#include "arbor/wls.hpp"

#include <cmath>

namespace arbor {

void WlsParams::validate() const {
  if (!(lambda >= 0.0)) throw Error(ErrorCode::ParamError, "wls lambda must be >= 0");
  if (!(sigma_color > 0.0)) throw Error(ErrorCode::ParamError, "wls sigma_color must be > 0");
  if (iterations < 1) throw Error(ErrorCode::ParamError, "wls iterations must be >= 1");
}

ConfidenceMap confidence_from_lr(const DisparityMap& left, const DisparityMap& right, double max_diff) {
  if (left.width() != right.width() || left.height() != right.height()) {
    throw Error(ErrorCode::ShapeError, "left and right disparity maps differ in size");
  }
  ConfidenceMap conf = ConfidenceMap::Zero(left.height(), left.width());
  for (int v = 0; v < left.height(); ++v) {
    for (int u = 0; u < left.width(); ++u) {
      if (!left.valid(u, v)) continue;
      const long ur = u - std::lround(left(u, v));
      if (ur < 0 || ur >= right.width() || !right.valid(static_cast<int>(ur), v)) continue;
      if (std::abs(static_cast<double>(left(u, v)) - right(static_cast<int>(ur), v)) <= max_diff) conf(v, u) = 1.0f;
    }
  }
  return conf;
}

Raster<double> scanline_fill(const DisparityMap& disp) {
  const int w = disp.width();
  const int h = disp.height();
  Raster<double> out(h, w);
  std::vector<bool> row_has_data(static_cast<std::size_t>(h), false);
  std::vector<int> left_idx(static_cast<std::size_t>(w));
  for (int v = 0; v < h; ++v) {
    int last = -1;
    for (int u = 0; u < w; ++u) {
      if (disp.valid(u, v)) last = u;
      left_idx[static_cast<std::size_t>(u)] = last;
    }
    if (last < 0) continue;
    row_has_data[static_cast<std::size_t>(v)] = true;
    int next = -1;
    for (int u = w - 1; u >= 0; --u) {
      if (disp.valid(u, v)) {
        next = u;
        out(v, u) = disp(u, v);
        continue;
      }
      const int l = left_idx[static_cast<std::size_t>(u)];
      if (l < 0) {
        out(v, u) = disp(next, v);
      } else if (next < 0) {
        out(v, u) = disp(l, v);
      } else {
        const int dl = u - l;
        const int dr = next - u;
        if (dl < dr) out(v, u) = disp(l, v);
        else if (dr < dl) out(v, u) = disp(next, v);
        else out(v, u) = std::min(disp(l, v), disp(next, v));
      }
    }
  }
  int nearest = -1;
  for (int v = 0; v < h; ++v) {
    if (row_has_data[static_cast<std::size_t>(v)]) {
      nearest = v;
      break;
    }
  }
  if (nearest < 0) throw Error(ErrorCode::NoValidData, "disparity map has no valid pixel");
  for (int v = 0; v < h; ++v) {
    if (row_has_data[static_cast<std::size_t>(v)]) {
      nearest = v;
      continue;
    }
    // Distance to the previous filled row vs the next one.
    int below = -1;
    for (int t = v + 1; t < h; ++t) {
      if (row_has_data[static_cast<std::size_t>(t)]) {
        below = t;
        break;
      }
    }
    const int src = (nearest > v || below < 0 || v - nearest <= below - v) ? nearest : below;
    out.row(v) = out.row(src);
  }
  return out;
}

namespace {

void check_inputs(const DisparityMap& disp, const ImageBuffer& guide, const ConfidenceMap& conf) {
  if (guide.channels() != 1) throw Error(ErrorCode::FormatError, "WLS guide must be single-channel");
  if (guide.width() != disp.width() || guide.height() != disp.height() || conf.cols() != disp.width() ||
      conf.rows() != disp.height()) {
    throw Error(ErrorCode::ShapeError, "disparity, guide and confidence sizes differ");
  }
  if (!conf.allFinite() || (conf < 0.0f).any() || (conf > 1.0f).any()) {
    throw Error(ErrorCode::ParamError, "confidence must lie in [0, 1]");
  }
}

// Data weights: the confidence where the disparity is valid, 0 elsewhere.
Raster<double> data_weights(const DisparityMap& disp, const ConfidenceMap& conf) {
  Raster<double> c(disp.height(), disp.width());
  for (int v = 0; v < disp.height(); ++v) {
    for (int u = 0; u < disp.width(); ++u) c(v, u) = disp.valid(u, v) ? conf(v, u) : 0.0;
  }
  return c;
}

}  // namespace

double wls_energy(const Raster<double>& x, const DisparityMap& disp, const ImageBuffer& guide,
                  const ConfidenceMap& conf, const WlsParams& params) {
  check_inputs(disp, guide, conf);
  const Raster<double> c = data_weights(disp, conf);
  const int w = disp.width();
  const int h = disp.height();
  double data = 0.0;
  double smooth = 0.0;
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      if (c(v, u) > 0.0) data += c(v, u) * std::pow(x(v, u) - disp(u, v), 2);
      if (u + 1 < w) {
        smooth += wls_weight(guide.at(u, v), guide.at(u + 1, v), params.sigma_color) * std::pow(x(v, u) - x(v, u + 1), 2);
      }
      if (v + 1 < h) {
        smooth += wls_weight(guide.at(u, v), guide.at(u, v + 1), params.sigma_color) * std::pow(x(v, u) - x(v + 1, u), 2);
      }
    }
  }
  return data + params.lambda * smooth;
}

DisparityMap wls_refine(const DisparityMap& disp, const ImageBuffer& guide, const ConfidenceMap& conf,
                        const WlsParams& params) {
  params.validate();
  check_inputs(disp, guide, conf);
  const int w = disp.width();
  const int h = disp.height();
  const Raster<double> c = data_weights(disp, conf);
  Raster<double> x = scanline_fill(disp);

  // wr(v, u) couples (u, v)-(u+1, v); wd(v, u) couples (u, v)-(u, v+1); both pre-scaled by lambda.
  Raster<double> wr = Raster<double>::Zero(h, w);
  Raster<double> wd = Raster<double>::Zero(h, w);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      if (u + 1 < w) wr(v, u) = params.lambda * wls_weight(guide.at(u, v), guide.at(u + 1, v), params.sigma_color);
      if (v + 1 < h) wd(v, u) = params.lambda * wls_weight(guide.at(u, v), guide.at(u, v + 1), params.sigma_color);
    }
  }
  Raster<double> target(h, w);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) target(v, u) = disp.valid(u, v) ? static_cast<double>(disp(u, v)) : 0.0;
  }

  for (int it = 0; it < params.iterations; ++it) {
    for (int v = 0; v < h; ++v) {
      for (int u = 0; u < w; ++u) {
        double num = c(v, u) * target(v, u);
        double den = c(v, u);
        if (u > 0) {
          num += wr(v, u - 1) * x(v, u - 1);
          den += wr(v, u - 1);
        }
        if (u + 1 < w) {
          num += wr(v, u) * x(v, u + 1);
          den += wr(v, u);
        }
        if (v > 0) {
          num += wd(v - 1, u) * x(v - 1, u);
          den += wd(v - 1, u);
        }
        if (v + 1 < h) {
          num += wd(v, u) * x(v + 1, u);
          den += wd(v, u);
        }
        if (den > 0.0) x(v, u) = num / den;
      }
    }
  }
  return DisparityMap(x.cast<float>());
}

}  // namespace arbor
