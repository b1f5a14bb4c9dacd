#pragma once

#include "arbor/config.hpp"
#include "arbor/fusion.hpp"
#include "arbor/metrics.hpp"
#include "arbor/synthgen.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace arbor {

/// Process exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,            // bad flags or config
  kExitUnreadableInput = 2,  // missing/unparsable image, calibration or PFM
  kExitShapeMismatch = 3,    // image/calibration/mask dimensions disagree
  kExitBadManifest = 4,      // mask manifest fails schema validation
  kExitFrameMismatch = 5,    // prediction and ground-truth frame ids differ
  kExitFailure = 6,          // processing error (e.g. no valid disparity)
};

int exit_code_for(const Error& error);

struct DisparityStages {
  ImageBuffer left;   // preprocessed, also the WLS guide
  ImageBuffer right;  // preprocessed
  DisparityMap raw;
  DisparityMap right_disparity;
  ConfidenceMap confidence;
  DisparityMap refined;  // equals raw when WLS is disabled
};

/// preprocess -> SGBM (+ right view when lr_check) -> WLS.
DisparityStages compute_disparity(const StereoFrame& frame, const PipelineConfig& config);

/// Loads both PNGs and the calibration; read failures raise IoError/FormatError,
/// size or rectification mismatches raise ShapeError.
StereoFrame load_stereo_frame(const std::filesystem::path& left, const std::filesystem::path& right,
                              const std::filesystem::path& calibration);

struct DisparityCommand {
  std::filesystem::path left, right, calibration, out_dir;
};

struct DepthCommand {
  std::filesystem::path disparity, calibration, out_dir;
};

struct LocalizeCommand {
  std::filesystem::path left, right, calibration, manifest, out_dir;
};

struct EvalCommand {
  std::vector<std::filesystem::path> predictions;   // manifests, paired by position
  std::vector<std::filesystem::path> ground_truth;  // manifests
  std::optional<std::filesystem::path> depth_pairs; // CSV: estimated_m,ground_truth_m
  std::filesystem::path out_dir;
};

struct SynthCommand {
  std::optional<std::filesystem::path> scene;        // SceneSpec JSON
  std::optional<std::filesystem::path> calibration;  // with depths: range protocol
  std::vector<double> depths;
  double noise_sigma = 2.0;
  std::filesystem::path out_dir;
};

/// Writes raw.pfm, refined.pfm, raw.png, refined.png.
void cmd_disparity(const DisparityCommand& cmd, const PipelineConfig& config);
/// Writes depth.pfm and depth.png.
void cmd_depth(const DepthCommand& cmd, const PipelineConfig& config);
/// Writes estimates.json, depth.pfm and overlay.png.
void cmd_localize(const LocalizeCommand& cmd, const PipelineConfig& config);
/// Writes report.json and report.csv.
void cmd_eval(const EvalCommand& cmd, const PipelineConfig& config);
/// Writes one scene directory (or one per depth under out_dir).
void cmd_synth(const SynthCommand& cmd, const PipelineConfig& config);

/// Writes left.png, right.png, gt_disp.pfm, gt_occlusion.png, calib.json,
/// scene.json and manifest.json + masks/.
void write_scene_directory(const std::filesystem::path& dir, const SceneSpec& spec);

std::string localization_to_json_text(const std::string& frame_id, const Localization& result);
std::vector<DepthPair> read_depth_pairs(const std::filesystem::path& csv);

}  // namespace arbor
