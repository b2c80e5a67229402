#include "gsmap/config.hpp"

#include "gsmap/errors.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <string>

namespace gsmap {

namespace {

void check_keys(const nlohmann::json& j, const std::set<std::string>& known,
                const std::string& scope) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!known.count(key)) throw DataError("config: unknown key \"" + scope + key + "\"");
  }
}

}  // namespace

MapConfig load_map_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("config: cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("config: " + path.string() + ": " + e.what());
  }

  check_keys(j, {"estimator", "tau_s", "buffer_limit", "cell_size", "footprint_sigma",
                 "floor_band", "agent_height", "ground_bin"},
             "");

  MapConfig config = MapConfig::defaults();
  try {
    if (j.contains("estimator")) {
      const auto& je = j.at("estimator");
      check_keys(je,
                 {"voxel_size", "epsilon", "lambda_sigma", "lambda_color", "tau",
                  "base_threshold", "opacity", "merge_mode", "max_merge_passes"},
                 "estimator.");
      const double voxel = je.value("voxel_size", config.estimator.voxel_size);
      config.estimator = EstimatorConfig::with_voxel_size(voxel);
      if (je.contains("epsilon")) config.estimator.epsilon = je.at("epsilon").get<double>();
      if (je.contains("base_threshold")) {
        config.estimator.base_threshold = je.at("base_threshold").get<double>();
      }
      config.estimator.lambda_sigma = je.value("lambda_sigma", config.estimator.lambda_sigma);
      config.estimator.lambda_color = je.value("lambda_color", config.estimator.lambda_color);
      config.estimator.tau = je.value("tau", config.estimator.tau);
      config.estimator.opacity = je.value("opacity", config.estimator.opacity);
      config.estimator.max_merge_passes =
          je.value("max_merge_passes", config.estimator.max_merge_passes);
      if (je.contains("merge_mode")) {
        const std::string mode = je.at("merge_mode").get<std::string>();
        if (mode == "verbatim") {
          config.estimator.merge_mode = MergeMode::Verbatim;
        } else if (mode == "flatness") {
          config.estimator.merge_mode = MergeMode::Flatness;
        } else {
          throw DataError("config: merge_mode must be \"verbatim\" or \"flatness\", got \"" +
                          mode + "\"");
        }
      }
    }
    config.tau_s = j.value("tau_s", config.tau_s);
    config.buffer_limit = j.value("buffer_limit", config.buffer_limit);
    config.cell_size = j.value("cell_size", config.cell_size);
    config.footprint_sigma = j.value("footprint_sigma", config.footprint_sigma);
    config.floor_band = j.value("floor_band", config.floor_band);
    config.agent_height = j.value("agent_height", config.agent_height);
    config.ground_bin = j.value("ground_bin", config.ground_bin);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("config: " + path.string() + ": " + e.what());
  }

  if (!(config.estimator.voxel_size > 0.0) || !(config.cell_size > 0.0) ||
      !(config.estimator.epsilon > 0.0)) {
    throw DataError("config: sizes and epsilon must be positive");
  }
  if (!(config.estimator.opacity > 0.0) || config.estimator.opacity > 1.0) {
    throw DataError("config: opacity must be in (0, 1]");
  }
  return config;
}

void save_map_config(const std::filesystem::path& path, const MapConfig& config) {
  nlohmann::json j;
  j["estimator"]["voxel_size"] = config.estimator.voxel_size;
  j["estimator"]["epsilon"] = config.estimator.epsilon;
  j["estimator"]["lambda_sigma"] = config.estimator.lambda_sigma;
  j["estimator"]["lambda_color"] = config.estimator.lambda_color;
  j["estimator"]["tau"] = config.estimator.tau;
  j["estimator"]["base_threshold"] = config.estimator.base_threshold;
  j["estimator"]["opacity"] = config.estimator.opacity;
  j["estimator"]["merge_mode"] =
      config.estimator.merge_mode == MergeMode::Verbatim ? "verbatim" : "flatness";
  j["estimator"]["max_merge_passes"] = config.estimator.max_merge_passes;
  j["tau_s"] = config.tau_s;
  j["buffer_limit"] = config.buffer_limit;
  j["cell_size"] = config.cell_size;
  j["footprint_sigma"] = config.footprint_sigma;
  j["floor_band"] = config.floor_band;
  j["agent_height"] = config.agent_height;
  j["ground_bin"] = config.ground_bin;

  std::ofstream out(path);
  if (!out) throw DataError("config: cannot open " + path.string() + " for writing");
  out << j.dump(2) << "\n";
}

}  // namespace gsmap
