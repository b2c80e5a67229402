#pragma once

#include "gsmap/map.hpp"

#include <filesystem>

namespace gsmap {

struct LoadedMap {
  SemanticMap map;
  MapConfig config;
};

/// Writes the map and its config to a little-endian binary container with a
/// magic tag, a format version, and a CRC-32 over the payload.  Round trips
/// are bit-exact.
void save_map(const std::filesystem::path& path, const SemanticMap& map, const MapConfig& config);

/// Verifies magic, version, and checksum before decoding; failures are data
/// errors.
LoadedMap load_map(const std::filesystem::path& path);

}  // namespace gsmap
