// Command-line front end: synth, disparity, depth, localize, eval.

#include "arbor/pipeline.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace {

struct GlobalOptions {
  std::string config_path;
  int jobs = 1;
  std::uint64_t seed = 2024;
  bool seed_given = false;
  std::vector<std::string> settings;  // key=value overrides

  // Named shortcuts for the SGBM / WLS keys.
  std::optional<int> num_disparities, p1, p2, uniqueness, speckle_window, paths;
  std::optional<double> speckle_range;
  bool no_lr_check = false;
  std::optional<bool> wls;
};

arbor::PipelineConfig build_config(const GlobalOptions& g) {
  arbor::PipelineConfig config = g.config_path.empty() ? arbor::PipelineConfig{} : arbor::load_config(g.config_path);
  for (const auto& kv : g.settings) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw arbor::Error(arbor::ErrorCode::ParamError, "--set expects key=value: " + kv);
    config.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (g.num_disparities) config.sgbm.num_disparities = *g.num_disparities;
  if (g.p1) config.sgbm.p1 = *g.p1;
  if (g.p2) config.sgbm.p2 = *g.p2;
  if (g.uniqueness) config.sgbm.uniqueness_ratio = *g.uniqueness;
  if (g.speckle_window) config.sgbm.speckle_window = *g.speckle_window;
  if (g.speckle_range) config.sgbm.speckle_range = *g.speckle_range;
  if (g.paths) config.sgbm.num_paths = *g.paths;
  if (g.no_lr_check) config.sgbm.lr_check = false;
  if (g.wls) config.wls_enabled = *g.wls;
  config.jobs = g.jobs;
  if (g.seed_given) config.seed = g.seed;
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stereo depth, branch localization and evaluation"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--config", g.config_path, "Pipeline config file (INI sections)")->check(CLI::ExistingFile);
  app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option_function<std::uint64_t>("--seed", [&](std::uint64_t s) { g.seed = s; g.seed_given = true; },
                                         "Base seed for synthetic scenes");
  app.add_option("--set", g.settings, "Override a config key, e.g. --set wls.lambda=2000");
  app.add_option("--num-disparities", g.num_disparities);
  app.add_option("--p1", g.p1);
  app.add_option("--p2", g.p2);
  app.add_option("--uniqueness", g.uniqueness, "Uniqueness ratio in percent");
  app.add_option("--speckle-window", g.speckle_window);
  app.add_option("--speckle-range", g.speckle_range);
  app.add_option("--paths", g.paths, "Aggregation paths (4 or 8)");
  app.add_flag("--no-lr-check", g.no_lr_check);
  app.add_flag("--wls,!--no-wls", g.wls, "Enable or disable WLS refinement");

  arbor::SynthCommand synth;
  std::string synth_scene, synth_calib;
  auto* synth_cmd = app.add_subcommand("synth", "Render synthetic stereo scenes with ground truth");
  synth_cmd->add_option("--scene", synth_scene, "SceneSpec JSON");
  synth_cmd->add_option("--calib", synth_calib, "Calibration JSON (range protocol)");
  synth_cmd->add_option("--depths", synth.depths, "Branch depths in meters (range protocol)")->delimiter(',');
  synth_cmd->add_option("--noise", synth.noise_sigma, "Noise sigma for the range protocol");
  synth_cmd->add_option("--out", synth.out_dir, "Output directory")->required();

  arbor::DisparityCommand disparity;
  auto* disparity_cmd = app.add_subcommand("disparity", "Compute raw and refined disparity");
  disparity_cmd->add_option("--left", disparity.left)->required();
  disparity_cmd->add_option("--right", disparity.right)->required();
  disparity_cmd->add_option("--calib", disparity.calibration);
  disparity_cmd->add_option("--out", disparity.out_dir);

  arbor::DepthCommand depth;
  auto* depth_cmd = app.add_subcommand("depth", "Convert a disparity PFM to metric depth");
  depth_cmd->add_option("--disparity", depth.disparity)->required();
  depth_cmd->add_option("--calib", depth.calibration);
  depth_cmd->add_option("--out", depth.out_dir);

  arbor::LocalizeCommand localize;
  auto* localize_cmd = app.add_subcommand("localize", "Fuse instance masks with stereo depth");
  localize_cmd->add_option("--left", localize.left)->required();
  localize_cmd->add_option("--right", localize.right)->required();
  localize_cmd->add_option("--calib", localize.calibration);
  localize_cmd->add_option("--masks", localize.manifest, "Mask exchange manifest")->required();
  localize_cmd->add_option("--out", localize.out_dir);

  arbor::EvalCommand eval;
  std::string depth_pairs;
  auto* eval_cmd = app.add_subcommand("eval", "Segmentation mAP and depth RMSE");
  eval_cmd->add_option("--pred", eval.predictions, "Prediction manifest (repeatable)")->required();
  eval_cmd->add_option("--gt", eval.ground_truth, "Ground-truth manifest (repeatable)")->required();
  eval_cmd->add_option("--depth-pairs", depth_pairs, "CSV of estimated_m,ground_truth_m");
  eval_cmd->add_option("--out", eval.out_dir);

  for (auto* sub : {synth_cmd, disparity_cmd, depth_cmd, localize_cmd, eval_cmd}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return arbor::kExitUsage;
  }

  try {
    const arbor::PipelineConfig config = build_config(g);
    if (*synth_cmd) {
      if (!synth_scene.empty()) synth.scene = synth_scene;
      if (!synth_calib.empty()) synth.calibration = synth_calib;
      arbor::cmd_synth(synth, config);
    } else if (*disparity_cmd) {
      arbor::cmd_disparity(disparity, config);
    } else if (*depth_cmd) {
      arbor::cmd_depth(depth, config);
    } else if (*localize_cmd) {
      arbor::cmd_localize(localize, config);
    } else if (*eval_cmd) {
      if (!depth_pairs.empty()) eval.depth_pairs = depth_pairs;
      arbor::cmd_eval(eval, config);
    }
  } catch (const arbor::Error& e) {
    std::cerr << "arbor: " << e.what() << '\n';
    return arbor::exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "arbor: " << e.what() << '\n';
    return arbor::kExitFailure;
  }
  return arbor::kExitOk;
}
