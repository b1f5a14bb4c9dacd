#pragma once

#include "arbor/fusion.hpp"
#include "arbor/preprocess.hpp"
#include "arbor/sgbm.hpp"
#include "arbor/wls.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace arbor {

struct FusionConfig {
  double min_valid_ratio = kDefaultMinValidRatio;
};

struct MetricsConfig {
  double range_bucket_m = 0.5;  // RMSE buckets: ground truth rounded to this step
};

struct IoConfig {
  std::string input_dir;
  std::string output_dir;
};

/// Everything a pipeline run needs besides its input files.
///
/// File format (INI / TOML-style):
///
///     calibration = calib.json
///     [preprocess]
///     denoise_radius = 2
///     [sgbm]
///     num_disparities = 128
///     [wls]
///     enabled = true
///
/// Missing keys keep their defaults; unknown sections or keys are rejected.
struct PipelineConfig {
  std::string calibration;
  PreprocessConfig preprocess;
  SgbmParams sgbm;
  WlsParams wls;
  bool wls_enabled = true;
  FusionConfig fusion;
  MetricsConfig metrics;
  IoConfig io;
  int jobs = 1;
  std::uint64_t seed = 2024;

  /// Sets `section.key` (or a top-level key) from its textual value.
  /// Throws ParamError for unknown keys or unparsable values.
  void set(std::string_view key, std::string_view value);
  void validate() const;

  static const std::vector<std::string>& keys();
};

PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(std::string_view text);

}  // namespace arbor
