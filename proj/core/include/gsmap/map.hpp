#pragma once

#include "gsmap/camera.hpp"
#include "gsmap/estimator.hpp"
#include "gsmap/gaussian.hpp"
#include "gsmap/grid.hpp"
#include "gsmap/semantics.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace gsmap {

using InstanceId = std::uint32_t;
using RegionId = std::uint32_t;

struct InstanceUnit {
  InstanceId id = 0;
  GaussianSet gaussians;
  std::string text;
  Embedding embedding;
};

struct RegionUnit {
  RegionId id = 0;
  std::set<InstanceId> members;
  std::string text;
  Embedding embedding;
};

struct MapConfig {
  EstimatorConfig estimator;
  double tau_s = 0.8;              // semantic match threshold (strict >)
  std::size_t buffer_limit = 300;  // unit text budget, bytes
  double cell_size = 0.05;         // index grid resolution, meters
  double footprint_sigma = 2.0;    // footprint half-extent in marginal sigmas
  double floor_band = 0.1;         // free-space band half-height around the floor, meters
  double agent_height = 0.88;      // obstacle ceiling above the floor, meters
  double ground_bin = 0.02;        // floor-height histogram resolution, meters

  static MapConfig defaults() {
    MapConfig cfg;
    cfg.estimator = EstimatorConfig::with_voxel_size(0.01);
    return cfg;
  }
};

/// A candidate object observation ready for matching: its splats plus text.
struct InstanceObservation {
  GaussianSet gaussians;
  std::string text;
  Embedding embedding;
};

/// A candidate region observation with members already mapped to global ids.
struct RegionObservation {
  std::set<InstanceId> members;
  std::string text;
  Embedding embedding;
};

enum class UnitKind { Instance, Region };

struct IngestReport {
  std::map<int, InstanceId> instance_mapping;  // parse-local id -> global id
  std::map<int, RegionId> region_mapping;
  std::vector<int> skipped_instances;  // local ids with no valid depth
  std::vector<int> skipped_regions;    // local ids with no surviving members
};

/// Everything needed to ingest one frame.
struct FrameInput {
  DepthFrame depth;
  ColorFrame color;
  SemanticParse parse;
  std::map<int, BinaryMask> masks;  // keyed by parse-local instance id
};

class SemanticMap {
 public:
  explicit SemanticMap(double cell_size = 0.05) { grid_.cell_size = cell_size; }

  const std::map<InstanceId, InstanceUnit>& instances() const { return instances_; }
  const std::map<RegionId, RegionUnit>& regions() const { return regions_; }
  const IndexGrid& grid() const { return grid_; }
  InstanceId next_instance_id() const { return next_instance_id_; }
  RegionId next_region_id() const { return next_region_id_; }

  const InstanceUnit& instance(InstanceId id) const;
  const RegionUnit& region(RegionId id) const;
  bool has_instance(InstanceId id) const { return instances_.count(id) != 0; }
  bool has_region(RegionId id) const { return regions_.count(id) != 0; }

  /// Cells a unit currently occupies, sorted.
  const std::vector<CellCoord>& footprint(UnitKind kind, std::uint32_t id) const;
  /// Footprint centroid, rounded to the nearest cell.
  CellCoord anchor_cell(UnitKind kind, std::uint32_t id) const;

  /// First existing instance (ascending id) whose embedding clears tau_s and
  /// that shares at least one mergeable Gaussian pair with the candidate.
  std::optional<InstanceId> match_instance(const InstanceObservation& candidate,
                                           const MapConfig& config) const;

  /// Union the candidate's splats into the target (dropping bit-identical
  /// duplicates), re-merge, append text (summarizing past the budget), and
  /// refresh the embedding and footprints.
  void merge_into_instance(InstanceId target, const InstanceObservation& candidate,
                           const MapConfig& config, const EmbedderContract& embedder,
                           const SummarizerContract& summarizer);

  InstanceId register_instance(InstanceObservation candidate, const MapConfig& config);

  /// First existing region (ascending id) clearing tau_s with a non-empty
  /// member intersection.
  std::optional<RegionId> match_region(const RegionObservation& candidate,
                                       const MapConfig& config) const;

  void merge_into_region(RegionId target, const RegionObservation& candidate,
                         const MapConfig& config, const EmbedderContract& embedder,
                         const SummarizerContract& summarizer);

  RegionId register_region(RegionObservation candidate, const MapConfig& config);

  /// Full per-frame update: occupancy from the whole depth image, then
  /// instances in parse order, then regions in parse order.
  IngestReport ingest_frame(const FrameInput& frame, const MapConfig& config,
                            const EmbedderContract& embedder,
                            const SummarizerContract& summarizer);

  /// Restores internal caches after deserialization.
  void restore(std::map<InstanceId, InstanceUnit> instances,
               std::map<RegionId, RegionUnit> regions, IndexGrid grid,
               InstanceId next_instance_id, RegionId next_region_id);

  bool deep_equal(const SemanticMap& other) const;

 private:
  void refresh_instance_footprint(InstanceId id, const MapConfig& config);
  void refresh_region_footprint(RegionId id);
  std::vector<CellCoord> instance_cells(const InstanceUnit& unit, const MapConfig& config) const;
  void update_occupancy(const PointCloud& cloud, const MapConfig& config);

  IndexGrid grid_;
  std::map<InstanceId, InstanceUnit> instances_;
  std::map<RegionId, RegionUnit> regions_;
  std::map<InstanceId, std::vector<CellCoord>> instance_footprints_;
  std::map<RegionId, std::vector<CellCoord>> region_footprints_;
  InstanceId next_instance_id_ = 0;
  RegionId next_region_id_ = 0;
};

/// Masked back-projection of one frame into a world-space colored cloud.
PointCloud extract_instance_cloud(const DepthFrame& depth, const ColorFrame& color,
                                  const BinaryMask& mask);

}  // namespace gsmap
