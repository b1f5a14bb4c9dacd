#include "arbor/pipeline.hpp"

#include "arbor/io.hpp"
#include "arbor/manifest.hpp"
#include "arbor/render.hpp"
#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

namespace arbor {
namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(const Error& error) {
  switch (error.code()) {
    case ErrorCode::IoError:
    case ErrorCode::FormatError:
    case ErrorCode::SpecError: return kExitUnreadableInput;
    case ErrorCode::ShapeError: return kExitShapeMismatch;
    case ErrorCode::SchemaError: return kExitBadManifest;
    case ErrorCode::FrameMismatch: return kExitFrameMismatch;
    case ErrorCode::ParamError: return kExitUsage;
    default: return kExitFailure;
  }
}

namespace {

fs::path resolve_input(const fs::path& p, const PipelineConfig& config) {
  if (p.empty() || p.is_absolute() || config.io.input_dir.empty()) return p;
  return fs::path(config.io.input_dir) / p;
}

fs::path resolve_output_dir(const fs::path& p, const PipelineConfig& config) {
  fs::path dir = p.empty() ? fs::path(config.io.output_dir) : p;
  if (dir.empty()) dir = ".";
  fs::create_directories(dir);
  return dir;
}

fs::path calibration_path(const fs::path& given, const PipelineConfig& config) {
  if (!given.empty()) return resolve_input(given, config);
  if (!config.calibration.empty()) return resolve_input(config.calibration, config);
  throw Error(ErrorCode::ParamError, "no calibration file given (--calib or config key 'calibration')");
}

CameraCalibration load_calibration_input(const fs::path& path) {
  try {
    return io::read_calibration(path);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParamError) throw Error(ErrorCode::FormatError, path.string() + ": " + e.what());
    throw;
  }
}

void write_rendering(const fs::path& path, const Rendering& r) { io::write_png(path, r.image, r.legend); }

std::string format_fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

}  // namespace

StereoFrame load_stereo_frame(const fs::path& left, const fs::path& right, const fs::path& calibration) {
  StereoFrame frame;
  frame.calibration = load_calibration_input(calibration);
  frame.left = io::read_png(left);
  frame.right = io::read_png(right);
  if (!frame.calibration.rectified) {
    throw Error(ErrorCode::ShapeError, "calibration does not declare a rectified pair");
  }
  frame.validate();
  return frame;
}

DisparityStages compute_disparity(const StereoFrame& frame, const PipelineConfig& config) {
  config.validate();
  DisparityStages st;
  st.left = preprocess(frame.left, config.preprocess);
  st.right = preprocess(frame.right, config.preprocess);
  SgbmParams params = config.sgbm;
  params.jobs = config.jobs;
  const StereoFrame prepared{st.left, st.right, frame.calibration};
  SgbmResult match = sgbm_match(prepared, params);
  st.raw = std::move(match.left);
  st.right_disparity = std::move(match.right);
  if (params.lr_check) {
    st.confidence = confidence_from_lr(st.raw, st.right_disparity, params.lr_max_diff);
  } else {
    st.confidence = st.raw.values.unaryExpr([](float d) { return is_valid_disparity(d) ? 1.0f : 0.0f; });
  }
  st.refined = config.wls_enabled ? wls_refine(st.raw, st.left, st.confidence, config.wls) : st.raw;
  return st;
}

void cmd_disparity(const DisparityCommand& cmd, const PipelineConfig& config) {
  const StereoFrame frame = load_stereo_frame(resolve_input(cmd.left, config), resolve_input(cmd.right, config),
                                              calibration_path(cmd.calibration, config));
  const DisparityStages st = compute_disparity(frame, config);
  const fs::path out = resolve_output_dir(cmd.out_dir, config);
  io::write_pfm(out / "raw.pfm", st.raw);
  io::write_pfm(out / "refined.pfm", st.refined);
  write_rendering(out / "raw.png", render_disparity(st.raw));
  write_rendering(out / "refined.png", render_disparity(st.refined));
}

void cmd_depth(const DepthCommand& cmd, const PipelineConfig& config) {
  const CameraCalibration calib = load_calibration_input(calibration_path(cmd.calibration, config));
  const DisparityMap disp = io::read_disparity_pfm(resolve_input(cmd.disparity, config));
  const DepthMap depth = disparity_map_to_depth_map(disp, calib);
  const fs::path out = resolve_output_dir(cmd.out_dir, config);
  io::write_pfm(out / "depth.pfm", depth);
  write_rendering(out / "depth.png", render_depth_overlay(depth, {}));
}

std::string localization_to_json_text(const std::string& frame_id, const Localization& result) {
  json estimates = json::array();
  for (const auto& e : result.estimates) {
    estimates.push_back({{"instance_id", e.instance_id},
                         {"label", e.label},
                         {"pixel_count", e.pixel_count},
                         {"valid_count", e.valid_count},
                         {"used_count", e.used_count},
                         {"valid_ratio", e.valid_ratio},
                         {"mean_depth_m", e.mean_depth},
                         {"median_depth_m", e.median_depth},
                         {"std_depth_m", e.std_depth},
                         {"centroid_m", {e.centroid.x(), e.centroid.y(), e.centroid.z()}}});
  }
  json excluded = json::array();
  for (const auto& x : result.excluded) excluded.push_back({{"instance_id", x.instance_id}, {"reason", x.reason}});
  const json j = {{"frame_id", frame_id}, {"estimates", estimates}, {"excluded", excluded}};
  return j.dump(2) + "\n";
}

void cmd_localize(const LocalizeCommand& cmd, const PipelineConfig& config) {
  // Validate the manifest before spending time on matching.
  const FrameMasks masks = load_frame_masks(resolve_input(cmd.manifest, config));
  const StereoFrame frame = load_stereo_frame(resolve_input(cmd.left, config), resolve_input(cmd.right, config),
                                              calibration_path(cmd.calibration, config));
  if (masks.manifest.width != frame.calibration.width || masks.manifest.height != frame.calibration.height) {
    throw Error(ErrorCode::ShapeError, "mask manifest size differs from the stereo frame");
  }
  const DisparityStages st = compute_disparity(frame, config);
  const DepthMap depth = disparity_map_to_depth_map(st.refined, frame.calibration);
  const Localization result =
      localize_branches(masks.masks, depth, frame.calibration, config.fusion.min_valid_ratio, config.jobs);
  const fs::path out = resolve_output_dir(cmd.out_dir, config);
  io::write_pfm(out / "depth.pfm", depth);
  write_rendering(out / "overlay.png", render_depth_overlay(depth, masks.masks));
  io::atomic_write(out / "estimates.json", localization_to_json_text(masks.manifest.frame_id, result));
}

std::vector<DepthPair> read_depth_pairs(const fs::path& csv) {
  std::istringstream in(io::read_text(csv));
  std::vector<DepthPair> pairs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (line_no == 1 && !(std::isdigit(static_cast<unsigned char>(line.front())) || line.front() == '-' ||
                          line.front() == '.')) {
      continue;  // header
    }
    const auto comma = line.find(',');
    try {
      if (comma == std::string::npos) throw std::invalid_argument("missing comma");
      std::size_t used = 0;
      DepthPair p;
      p.estimated = std::stod(line.substr(0, comma), &used);
      p.ground_truth = std::stod(line.substr(comma + 1));
      if (!(p.ground_truth > 0.0)) throw std::invalid_argument("ground truth must be positive");
      pairs.push_back(p);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::FormatError, csv.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return pairs;
}

void cmd_eval(const EvalCommand& cmd, const PipelineConfig& config) {
  if (cmd.predictions.size() != cmd.ground_truth.size()) {
    throw Error(ErrorCode::ParamError, "need one ground-truth manifest per prediction manifest");
  }
  std::vector<EvalPair> frames;
  for (std::size_t i = 0; i < cmd.predictions.size(); ++i) {
    FrameMasks pred = load_frame_masks(resolve_input(cmd.predictions[i], config));
    FrameMasks gt = load_frame_masks(resolve_input(cmd.ground_truth[i], config));
    if (pred.manifest.frame_id != gt.manifest.frame_id) {
      throw Error(ErrorCode::FrameMismatch,
                  "prediction frame '" + pred.manifest.frame_id + "' vs ground truth '" + gt.manifest.frame_id + "'");
    }
    if (pred.manifest.width != gt.manifest.width || pred.manifest.height != gt.manifest.height) {
      throw Error(ErrorCode::ShapeError, "frame '" + gt.manifest.frame_id + "' sizes differ");
    }
    frames.push_back({std::move(pred.masks), std::move(gt.masks)});
  }

  const auto thresholds = iou_thresholds();
  const auto ap_box = per_threshold_ap(frames, MatchMode::Box);
  const auto ap_mask = per_threshold_ap(frames, MatchMode::Mask);
  const double map_box = std::accumulate(ap_box.begin(), ap_box.end(), 0.0) / kNumIouThresholds;
  const double map_mask = std::accumulate(ap_mask.begin(), ap_mask.end(), 0.0) / kNumIouThresholds;
  json per_threshold = json::array();
  std::ostringstream csv;
  csv << "section,key,value\n";
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    per_threshold.push_back({{"threshold", thresholds[i]}, {"ap_box", ap_box[i]}, {"ap_mask", ap_mask[i]}});
  }
  for (std::size_t i = 0; i < thresholds.size(); ++i) csv << "ap_box," << format_fixed(thresholds[i], 2) << ',' << ap_box[i] << '\n';
  for (std::size_t i = 0; i < thresholds.size(); ++i) csv << "ap_mask," << format_fixed(thresholds[i], 2) << ',' << ap_mask[i] << '\n';
  csv << "map,box," << map_box << "\nmap,mask," << map_mask << '\n';

  json rmse_by_range = json::object();
  json rmse_overall = nullptr;
  if (cmd.depth_pairs) {
    const auto pairs = read_depth_pairs(resolve_input(*cmd.depth_pairs, config));
    if (!pairs.empty()) {
      std::map<long, std::vector<DepthPair>> buckets;
      const double step = config.metrics.range_bucket_m;
      for (const auto& p : pairs) buckets[std::lround(p.ground_truth / step)].push_back(p);
      for (const auto& [index, members] : buckets) {
        const std::string key = format_fixed(index * step, 2);
        const double value = rmse(members);
        rmse_by_range[key] = {{"count", members.size()}, {"rmse_m", value}};
        csv << "rmse_m," << key << ',' << value << '\n';
      }
      rmse_overall = rmse(pairs);
      csv << "rmse_m,all," << rmse(pairs) << '\n';
    }
  }
  const json report = {{"frames", frames.size()},
                       {"per_threshold_ap", per_threshold},
                       {"map_box", map_box},
                       {"map_mask", map_mask},
                       {"rmse_by_range", rmse_by_range},
                       {"rmse_m", rmse_overall}};
  const fs::path out = resolve_output_dir(cmd.out_dir, config);
  io::atomic_write(out / "report.json", report.dump(2) + "\n");
  io::atomic_write(out / "report.csv", csv.str());
}

void write_scene_directory(const fs::path& dir, const SceneSpec& spec) {
  const SyntheticScene scene = render_scene(spec);
  fs::create_directories(dir);
  io::write_png(dir / "left.png", scene.frame.left);
  io::write_png(dir / "right.png", scene.frame.right);
  io::write_pfm(dir / "gt_disp.pfm", scene.gt_disparity);
  io::write_png(dir / "gt_occlusion.png", ImageBuffer((scene.gt_occlusion.cast<int>() * 255).cast<std::uint8_t>(), 1));
  io::write_calibration(dir / "calib.json", spec.calib);
  io::atomic_write(dir / "scene.json", scene_to_json_text(spec));
  std::string frame_id = fs::absolute(dir).lexically_normal().filename().string();
  if (frame_id.empty()) frame_id = fs::absolute(dir).lexically_normal().parent_path().filename().string();
  write_frame_masks(dir, frame_id.empty() ? "scene" : frame_id, spec.calib.width, spec.calib.height, scene.masks);
}

void cmd_synth(const SynthCommand& cmd, const PipelineConfig& config) {
  const fs::path out = resolve_output_dir(cmd.out_dir, config);
  if (cmd.scene) {
    write_scene_directory(out, scene_from_json_text(io::read_text(resolve_input(*cmd.scene, config))));
    return;
  }
  if (cmd.depths.empty()) throw Error(ErrorCode::ParamError, "synth needs --scene or --depths");
  const CameraCalibration calib = load_calibration_input(calibration_path(cmd.calibration.value_or(""), config));
  const auto scenes = range_protocol(calib, cmd.depths, config.seed, cmd.noise_sigma);
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    write_scene_directory(out / ("range_" + format_fixed(cmd.depths[i], 2) + "m"), scenes[i]);
  }
}

}  // namespace arbor
