#pragma once

#include "gsmap/grid.hpp"
#include "gsmap/map.hpp"
#include "gsmap/renderer.hpp"
#include "gsmap/semantics.hpp"

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace gsmap {

struct ScoredUnit {
  UnitKind kind = UnitKind::Instance;
  std::uint32_t id = 0;
  double score = 0.0;
  CellCoord anchor;
};

/// Dense scalar field over the grid's bounding box, max-normalized.
struct ValueMap {
  CellCoord origin;        // cell coordinate of values[0]
  std::int64_t width = 0;  // cells
  std::int64_t height = 0;
  std::vector<double> values;  // row-major, y then x
  double sigma = 0.5;          // kernel width, meters
  double normalizer = 1.0;     // divide-by value that was applied

  bool contains(const CellCoord& c) const {
    return c.x >= origin.x && c.x < origin.x + width && c.y >= origin.y &&
           c.y < origin.y + height;
  }
  double at(const CellCoord& c) const {
    return values[static_cast<std::size_t>(c.y - origin.y) * width + (c.x - origin.x)];
  }
};

/// Scores every unit's text against the goal: instances in ascending id
/// order, then regions.
std::vector<ScoredUnit> score_units(const SemanticMap& map, const std::string& goal,
                                    const ScorerContract& scorer);

/// Deposits each unit's score at its anchor cell and spreads it with an
/// isotropic Gaussian kernel (truncated at 3 sigma, distances in meters),
/// then divides by the maximum so the peak reads 1.  An all-zero field keeps
/// normalizer 1.
ValueMap build_value_map(const std::vector<ScoredUnit>& scored, const IndexGrid& grid,
                         double sigma);

/// Free cells with at least one of their 8 neighbors unexplored, sorted.
std::vector<CellCoord> frontier_cells(const IndexGrid& grid);

/// Frontier cells grouped into 8-connected components; one representative
/// per group: the member nearest the group centroid (ties to the lowest
/// row-major cell).  Groups ordered by their lowest row-major member.
std::vector<CellCoord> detect_frontiers(const IndexGrid& grid);

/// Frontier representative nearest the field's argmax cell; ties to the
/// lowest row-major representative.  Nothing when there are no frontiers or
/// the field is empty.
std::optional<CellCoord> select_waypoint(const ValueMap& field,
                                         const std::vector<CellCoord>& frontiers);

struct SituatedPose {
  CellCoord position;
  double orientation = 0.0;  // radians, 0 = +x (east), counterclockwise
  bool degenerate = false;   // anchor and facing cells coincided
};

/// Agent pose implied by "where am I" evidence: position from the region
/// probability field (snapped to the nearest explored cell), orientation
/// toward the instance probability field's peak.  Nothing when either
/// field is all zero or the map has no explored cells.
std::optional<SituatedPose> localize_situation(const SemanticMap& map,
                                               const std::map<RegionId, double>& region_probs,
                                               const std::map<InstanceId, double>& instance_probs,
                                               double sigma);

struct LabeledView {
  std::string label;  // "front", "back", "left", "right"
  RenderCamera camera;
  ImageBuffer image;
};

/// Renders the map's splats from a situated pose: front at the pose's
/// orientation, then back, left, right.
std::array<LabeledView, 4> render_four_views(const SemanticMap& map, const SituatedPose& pose,
                                             const CameraIntrinsics& intrinsics,
                                             double agent_height, double near = 0.05,
                                             double far = 20.0);

}  // namespace gsmap
