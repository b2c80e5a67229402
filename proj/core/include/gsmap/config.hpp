#pragma once

#include "gsmap/map.hpp"

#include <filesystem>

namespace gsmap {

/// Reads a config JSON.  Every field is optional; "estimator.epsilon" and
/// "estimator.base_threshold" default from the (possibly overridden) voxel
/// size when absent.  Unknown keys are data errors so typos don't silently
/// fall back to defaults.
MapConfig load_map_config(const std::filesystem::path& path);

void save_map_config(const std::filesystem::path& path, const MapConfig& config);

}  // namespace gsmap
