#include "arbor/synthgen.hpp"

#include "arbor/io.hpp"
#include "arbor/preprocess.hpp"
#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

namespace arbor {

bool BranchSpec::contains(double x, double y) const {
  const double a = angle_deg * std::numbers::pi / 180.0;
  const Eigen::Vector2d axis(std::cos(a), std::sin(a));
  const Eigen::Vector2d p = Eigen::Vector2d(x, y) - center;
  const double t = std::clamp(p.dot(axis), -0.5 * length, 0.5 * length);
  return (p - t * axis).squaredNorm() <= radius * radius;
}

void SceneSpec::validate() const {
  try {
    calib.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::SpecError, e.what());
  }
  if (!(background_depth > calib.baseline)) throw Error(ErrorCode::SpecError, "background closer than the baseline");
  if (!(noise_sigma >= 0.0)) throw Error(ErrorCode::SpecError, "noise_sigma must be >= 0");
  for (std::size_t i = 0; i < branches.size(); ++i) {
    const BranchSpec& b = branches[i];
    const std::string name = "branch " + std::to_string(i);
    if (!(b.depth > calib.baseline)) throw Error(ErrorCode::SpecError, name + " closer than the baseline");
    if (!(b.depth < background_depth)) throw Error(ErrorCode::SpecError, name + " not in front of the background");
    if (!(b.radius > 0.0) || !(b.length >= 0.0)) throw Error(ErrorCode::SpecError, name + " has no extent");
    const double a = b.angle_deg * std::numbers::pi / 180.0;
    const double hx = 0.5 * b.length * std::abs(std::cos(a)) + b.radius;
    const double hy = 0.5 * b.length * std::abs(std::sin(a)) + b.radius;
    if (b.center.x() - hx < 0.0 || b.center.x() + hx > calib.width - 1 || b.center.y() - hy < 0.0 ||
        b.center.y() + hy > calib.height - 1) {
      throw Error(ErrorCode::SpecError, name + " extends outside the image");
    }
  }
}

namespace {

// Texture indexed by left-image column x in [0, width + pad).
Raster<double> make_texture(std::mt19937_64& rng, int width, int height, int lo, int hi) {
  std::uniform_int_distribution<int> dist(lo, hi);
  ImageBuffer raw(width, height, 1);
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) raw.at(u, v) = static_cast<std::uint8_t>(dist(rng));
  }
  const Eigen::VectorXd k = gaussian_kernel(1, 1.0);
  const Raster<double> src = raw.samples().cast<double>();
  Raster<double> tmp(height, width);
  Raster<double> out(height, width);
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      tmp(v, u) = k(0) * src(v, std::max(u - 1, 0)) + k(1) * src(v, u) + k(2) * src(v, std::min(u + 1, width - 1));
    }
  }
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      out(v, u) = k(0) * tmp(std::max(v - 1, 0), u) + k(1) * tmp(v, u) + k(2) * tmp(std::min(v + 1, height - 1), u);
    }
  }
  return out;
}

struct Surface {
  int branch = -1;  // -1 = background
  double depth = 0.0;
  double disparity = 0.0;
  Raster<double> texture;
};

std::uint8_t quantize(double value) { return static_cast<std::uint8_t>(std::clamp(std::lround(value), 0L, 255L)); }

}  // namespace

SyntheticScene render_scene(const SceneSpec& spec) {
  spec.validate();
  const CameraCalibration& calib = spec.calib;
  const int w = calib.width;
  const int h = calib.height;
  const double bf = calib.baseline * calib.fx;

  double max_disp = bf / spec.background_depth;
  for (const auto& b : spec.branches) max_disp = std::max(max_disp, bf / b.depth);
  const int tex_width = w + static_cast<int>(std::ceil(max_disp)) + 2;

  std::mt19937_64 rng(spec.texture_seed);
  std::vector<Surface> surfaces;
  surfaces.push_back({-1, spec.background_depth, bf / spec.background_depth,
                      make_texture(rng, tex_width, h, 0, kBackgroundTextureMax)});
  for (std::size_t i = 0; i < spec.branches.size(); ++i) {
    const auto& b = spec.branches[i];
    surfaces.push_back({static_cast<int>(i), b.depth, bf / b.depth, make_texture(rng, tex_width, h, kBranchTextureMin, 255)});
  }
  // Nearest first; the background is always last.
  std::vector<std::size_t> order(surfaces.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return surfaces[a].depth < surfaces[b].depth; });

  auto covers = [&](const Surface& s, double x, double y) {
    return s.branch < 0 || spec.branches[static_cast<std::size_t>(s.branch)].contains(x, y);
  };
  auto visible = [&](double x, double y) -> const Surface& {
    for (std::size_t idx : order) {
      if (covers(surfaces[idx], x, y)) return surfaces[idx];
    }
    return surfaces.front();
  };

  SyntheticScene scene;
  scene.frame.calibration = calib;
  scene.frame.left = ImageBuffer(w, h, 1);
  scene.frame.right = ImageBuffer(w, h, 1);
  scene.gt_disparity = DisparityMap(w, h);
  scene.gt_occlusion = BinaryMask::Zero(h, w);
  Raster<double> left(h, w);
  Raster<double> right(h, w);
  std::vector<BinaryMask> branch_masks(spec.branches.size(), BinaryMask::Zero(h, w));

  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const Surface& s = visible(u, v);
      left(v, u) = s.texture(v, u);
      scene.gt_disparity(u, v) = static_cast<float>(s.disparity);
      if (s.branch >= 0) branch_masks[static_cast<std::size_t>(s.branch)](v, u) = 1;
      // Where the surface point lands in the right view, and who is visible there.
      const double xr = u - s.disparity;
      if (xr < 0.0) {
        scene.gt_occlusion(v, u) = 1;
      } else {
        for (std::size_t idx : order) {
          const Surface& t = surfaces[idx];
          if (&t == &s) break;
          if (covers(t, xr + t.disparity, v)) {
            scene.gt_occlusion(v, u) = 1;
            break;
          }
        }
      }

      // Right pixel u samples each surface at left column u + disparity.
      for (std::size_t idx : order) {
        const Surface& t = surfaces[idx];
        const double x = u + t.disparity;
        if (!covers(t, x, v)) continue;
        const int x0 = static_cast<int>(std::floor(x));
        const double frac = x - x0;
        right(v, u) = frac == 0.0 ? t.texture(v, x0) : (1.0 - frac) * t.texture(v, x0) + frac * t.texture(v, x0 + 1);
        break;
      }
    }
  }

  std::mt19937_64 noise_rng(spec.texture_seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> noise(0.0, spec.noise_sigma > 0.0 ? spec.noise_sigma : 1.0);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const double nl = spec.noise_sigma > 0.0 ? noise(noise_rng) : 0.0;
      scene.frame.left.at(u, v) = quantize(left(v, u) + nl);
    }
  }
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const double nr = spec.noise_sigma > 0.0 ? noise(noise_rng) : 0.0;
      scene.frame.right.at(u, v) = quantize(right(v, u) + nr);
    }
  }

  for (std::size_t i = 0; i < spec.branches.size(); ++i) {
    scene.masks.push_back(make_segment(static_cast<std::int64_t>(i + 1), std::move(branch_masks[i])));
    scene.branch_depths.push_back(spec.branches[i].depth);
  }
  return scene;
}

std::vector<SceneSpec> range_protocol(const CameraCalibration& calib, const std::vector<double>& depths,
                                      std::uint64_t base_seed, double noise_sigma) {
  if (depths.empty()) throw Error(ErrorCode::SpecError, "range protocol needs at least one depth");
  constexpr double kBranchRadiusM = 0.04;
  constexpr double kBranchLengthM = 0.5;
  constexpr double kAngleDeg = 10.0;
  const double far = *std::max_element(depths.begin(), depths.end());
  std::vector<SceneSpec> scenes;
  for (std::size_t i = 0; i < depths.size(); ++i) {
    SceneSpec s;
    s.calib = calib;
    s.background_depth = 2.5 * far;
    s.texture_seed = base_seed + i;
    s.noise_sigma = noise_sigma;
    BranchSpec b;
    b.depth = depths[i];
    b.center = Eigen::Vector2d(0.5 * (calib.width - 1), 0.5 * (calib.height - 1));
    b.angle_deg = kAngleDeg;
    b.radius = calib.fx * kBranchRadiusM / b.depth;
    b.length = calib.fx * kBranchLengthM / b.depth;
    // Shrink the segment if it would not fit the frame.
    const double a = kAngleDeg * std::numbers::pi / 180.0;
    const double max_half_x = (0.5 * (calib.width - 1) - b.radius - 1.0) / std::cos(a);
    b.length = std::clamp(b.length, 0.0, 2.0 * std::max(0.0, max_half_x));
    s.branches.push_back(b);
    scenes.push_back(std::move(s));
  }
  return scenes;
}

std::string scene_to_json_text(const SceneSpec& spec) {
  nlohmann::json branches = nlohmann::json::array();
  for (const auto& b : spec.branches) {
    branches.push_back({{"center", {b.center.x(), b.center.y()}},
                        {"radius", b.radius},
                        {"angle_deg", b.angle_deg},
                        {"length", b.length},
                        {"depth_m", b.depth}});
  }
  const nlohmann::json j = {{"calibration", nlohmann::json::parse(io::calibration_to_json_text(spec.calib))},
                            {"background_depth_m", spec.background_depth},
                            {"branches", branches},
                            {"texture_seed", spec.texture_seed},
                            {"noise_sigma", spec.noise_sigma}};
  return j.dump(2) + "\n";
}

SceneSpec scene_from_json_text(const std::string& text) {
  SceneSpec s;
  try {
    const auto j = nlohmann::json::parse(text);
    s.calib = io::calibration_from_json_text(j.at("calibration").dump());
    s.background_depth = j.at("background_depth_m").get<double>();
    s.texture_seed = j.at("texture_seed").get<std::uint64_t>();
    s.noise_sigma = j.at("noise_sigma").get<double>();
    for (const auto& b : j.at("branches")) {
      BranchSpec br;
      br.center = Eigen::Vector2d(b.at("center").at(0).get<double>(), b.at("center").at(1).get<double>());
      br.radius = b.at("radius").get<double>();
      br.angle_deg = b.at("angle_deg").get<double>();
      br.length = b.at("length").get<double>();
      br.depth = b.at("depth_m").get<double>();
      s.branches.push_back(br);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SpecError, std::string("scene JSON: ") + e.what());
  }
  s.validate();
  return s;
}

}  // namespace arbor
