#include "arbor/config.hpp"

#include "arbor/io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <functional>
#include <map>
#include <sstream>

namespace arbor {
namespace {

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::ParamError, std::string(key) + ": cannot parse '" + std::string(text) + "'");
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw Error(ErrorCode::ParamError, std::string(key) + ": expected a boolean, got '" + std::string(text) + "'");
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

using Setter = std::function<void(PipelineConfig&, std::string_view key, std::string_view value)>;

template <typename T, typename Member>
Setter number(Member member) {
  return [member](PipelineConfig& c, std::string_view k, std::string_view v) { member(c) = parse_number<T>(k, v); };
}

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"calibration", [](PipelineConfig& c, std::string_view, std::string_view v) { c.calibration = v; }},
      {"jobs", number<int>([](PipelineConfig& c) -> int& { return c.jobs; })},
      {"seed", number<std::uint64_t>([](PipelineConfig& c) -> std::uint64_t& { return c.seed; })},
      {"preprocess.denoise_radius", number<int>([](PipelineConfig& c) -> int& { return c.preprocess.denoise_radius; })},
      {"preprocess.denoise_sigma",
       number<double>([](PipelineConfig& c) -> double& { return c.preprocess.denoise_sigma; })},
      {"preprocess.equalize",
       [](PipelineConfig& c, std::string_view k, std::string_view v) { c.preprocess.equalize = parse_bool(k, v); }},
      {"sgbm.min_disparity", number<int>([](PipelineConfig& c) -> int& { return c.sgbm.min_disparity; })},
      {"sgbm.num_disparities", number<int>([](PipelineConfig& c) -> int& { return c.sgbm.num_disparities; })},
      {"sgbm.block_size", number<int>([](PipelineConfig& c) -> int& { return c.sgbm.block_size; })},
      {"sgbm.p1", number<int>([](PipelineConfig& c) -> int& { return c.sgbm.p1; })},
      {"sgbm.p2", number<int>([](PipelineConfig& c) -> int& { return c.sgbm.p2; })},
      {"sgbm.uniqueness_ratio", number<int>([](PipelineConfig& c) -> int& { return c.sgbm.uniqueness_ratio; })},
      {"sgbm.speckle_window", number<int>([](PipelineConfig& c) -> int& { return c.sgbm.speckle_window; })},
      {"sgbm.speckle_range", number<double>([](PipelineConfig& c) -> double& { return c.sgbm.speckle_range; })},
      {"sgbm.num_paths", number<int>([](PipelineConfig& c) -> int& { return c.sgbm.num_paths; })},
      {"sgbm.lr_check",
       [](PipelineConfig& c, std::string_view k, std::string_view v) { c.sgbm.lr_check = parse_bool(k, v); }},
      {"sgbm.lr_max_diff", number<double>([](PipelineConfig& c) -> double& { return c.sgbm.lr_max_diff; })},
      {"wls.enabled",
       [](PipelineConfig& c, std::string_view k, std::string_view v) { c.wls_enabled = parse_bool(k, v); }},
      {"wls.lambda", number<double>([](PipelineConfig& c) -> double& { return c.wls.lambda; })},
      {"wls.sigma_color", number<double>([](PipelineConfig& c) -> double& { return c.wls.sigma_color; })},
      {"wls.iterations", number<int>([](PipelineConfig& c) -> int& { return c.wls.iterations; })},
      {"fusion.min_valid_ratio",
       number<double>([](PipelineConfig& c) -> double& { return c.fusion.min_valid_ratio; })},
      {"metrics.range_bucket_m",
       number<double>([](PipelineConfig& c) -> double& { return c.metrics.range_bucket_m; })},
      {"io.input_dir", [](PipelineConfig& c, std::string_view, std::string_view v) { c.io.input_dir = v; }},
      {"io.output_dir", [](PipelineConfig& c, std::string_view, std::string_view v) { c.io.output_dir = v; }},
  };
  return table;
}

}  // namespace

void PipelineConfig::set(std::string_view key, std::string_view value) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw Error(ErrorCode::ParamError, "unknown config key '" + std::string(key) + "'");
  it->second(*this, key, trim(value));
}

void PipelineConfig::validate() const {
  preprocess.validate();
  sgbm.validate();
  wls.validate();
  if (!(fusion.min_valid_ratio >= 0.0 && fusion.min_valid_ratio <= 1.0)) {
    throw Error(ErrorCode::ParamError, "fusion.min_valid_ratio must lie in [0, 1]");
  }
  if (!(metrics.range_bucket_m > 0.0)) throw Error(ErrorCode::ParamError, "metrics.range_bucket_m must be > 0");
  if (jobs < 1) throw Error(ErrorCode::ParamError, "jobs must be >= 1");
}

const std::vector<std::string>& PipelineConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [k, _] : setters()) out.push_back(k);
    return out;
  }();
  return names;
}

PipelineConfig parse_config(std::string_view text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::ParamError, std::string("config: ") + e.what());
  }
  PipelineConfig config;
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      const bool bare_section = node.data().empty() && setters().lower_bound(name + ".") != setters().end() &&
                                setters().lower_bound(name + ".")->first.starts_with(name + ".");
      if (!bare_section) config.set(name, node.data());
      continue;
    }
    for (const auto& [key, leaf] : node) config.set(name + "." + key, leaf.data());
  }
  config.validate();
  return config;
}

PipelineConfig load_config(const std::filesystem::path& path) { return parse_config(io::read_text(path)); }

}  // namespace arbor
