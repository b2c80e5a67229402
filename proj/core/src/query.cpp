#include "gsmap/query.hpp"

#include "gsmap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace gsmap {

std::vector<ScoredUnit> score_units(const SemanticMap& map, const std::string& goal,
                                    const ScorerContract& scorer) {
  std::vector<ScoredUnit> out;
  out.reserve(map.instances().size() + map.regions().size());
  for (const auto& [id, unit] : map.instances()) {
    ScoredUnit s;
    s.kind = UnitKind::Instance;
    s.id = id;
    s.score = scorer.score(unit.text, nullptr, goal);
    s.anchor = map.anchor_cell(UnitKind::Instance, id);
    out.push_back(s);
  }
  for (const auto& [id, unit] : map.regions()) {
    ScoredUnit s;
    s.kind = UnitKind::Region;
    s.id = id;
    s.score = scorer.score(unit.text, nullptr, goal);
    s.anchor = map.anchor_cell(UnitKind::Region, id);
    out.push_back(s);
  }
  return out;
}

ValueMap build_value_map(const std::vector<ScoredUnit>& scored, const IndexGrid& grid,
                         double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("build_value_map: sigma must be positive");

  ValueMap field;
  field.sigma = sigma;
  if (grid.cells.empty()) return field;

  std::int64_t min_x = std::numeric_limits<std::int64_t>::max();
  std::int64_t max_x = std::numeric_limits<std::int64_t>::min();
  std::int64_t min_y = min_x;
  std::int64_t max_y = max_x;
  for (const auto& [c, cell] : grid.cells) {
    (void)cell;
    min_x = std::min(min_x, c.x);
    max_x = std::max(max_x, c.x);
    min_y = std::min(min_y, c.y);
    max_y = std::max(max_y, c.y);
  }
  field.origin = CellCoord{min_x, min_y};
  field.width = max_x - min_x + 1;
  field.height = max_y - min_y + 1;
  field.values.assign(static_cast<std::size_t>(field.width * field.height), 0.0);

  const double radius_cells = 3.0 * sigma / grid.cell_size;
  const std::int64_t reach = static_cast<std::int64_t>(std::ceil(radius_cells));
  const double inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);

  for (const auto& unit : scored) {
    if (unit.score == 0.0) continue;
    const std::int64_t ax = unit.anchor.x;
    const std::int64_t ay = unit.anchor.y;
    for (std::int64_t y = std::max(min_y, ay - reach); y <= std::min(max_y, ay + reach); ++y) {
      for (std::int64_t x = std::max(min_x, ax - reach); x <= std::min(max_x, ax + reach); ++x) {
        const double dx = static_cast<double>(x - ax) * grid.cell_size;
        const double dy = static_cast<double>(y - ay) * grid.cell_size;
        const double dist_sq = dx * dx + dy * dy;
        if (dist_sq > 9.0 * sigma * sigma) continue;
        field.values[static_cast<std::size_t>(y - min_y) * field.width + (x - min_x)] +=
            unit.score * std::exp(-dist_sq * inv_two_sigma_sq);
      }
    }
  }

  double peak = 0.0;
  for (double v : field.values) peak = std::max(peak, v);
  field.normalizer = peak > 0.0 ? peak : 1.0;
  for (double& v : field.values) v /= field.normalizer;
  return field;
}

std::vector<CellCoord> frontier_cells(const IndexGrid& grid) {
  std::vector<CellCoord> out;
  for (const auto& [c, cell] : grid.cells) {
    if (cell.state != CellState::Free) continue;
    bool frontier = false;
    for (std::int64_t dy = -1; dy <= 1 && !frontier; ++dy) {
      for (std::int64_t dx = -1; dx <= 1 && !frontier; ++dx) {
        if (dx == 0 && dy == 0) continue;
        if (grid.state_at(CellCoord{c.x + dx, c.y + dy}) == CellState::Unexplored) {
          frontier = true;
        }
      }
    }
    if (frontier) out.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<CellCoord> detect_frontiers(const IndexGrid& grid) {
  std::vector<CellCoord> cells = frontier_cells(grid);
  std::sort(cells.begin(), cells.end(), row_major_less);
  std::set<CellCoord> remaining(cells.begin(), cells.end());

  std::vector<CellCoord> representatives;
  for (const auto& seed : cells) {
    if (!remaining.count(seed)) continue;

    std::vector<CellCoord> group;
    std::deque<CellCoord> frontier{seed};
    remaining.erase(seed);
    while (!frontier.empty()) {
      const CellCoord c = frontier.front();
      frontier.pop_front();
      group.push_back(c);
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const CellCoord n{c.x + dx, c.y + dy};
          auto it = remaining.find(n);
          if (it != remaining.end()) {
            remaining.erase(it);
            frontier.push_back(n);
          }
        }
      }
    }

    double cx = 0.0;
    double cy = 0.0;
    for (const auto& c : group) {
      cx += static_cast<double>(c.x);
      cy += static_cast<double>(c.y);
    }
    cx /= static_cast<double>(group.size());
    cy /= static_cast<double>(group.size());

    std::sort(group.begin(), group.end(), row_major_less);
    CellCoord best = group.front();
    double best_dist = std::numeric_limits<double>::infinity();
    for (const auto& c : group) {
      const double dx = static_cast<double>(c.x) - cx;
      const double dy = static_cast<double>(c.y) - cy;
      const double d = dx * dx + dy * dy;
      if (d < best_dist) {
        best_dist = d;
        best = c;
      }
    }
    representatives.push_back(best);
  }
  return representatives;
}

namespace {

CellCoord field_argmax(const ValueMap& field) {
  // Row-major scan keeping the first strict maximum: ties resolve to the
  // lowest row, then column.
  std::size_t best = 0;
  for (std::size_t i = 1; i < field.values.size(); ++i) {
    if (field.values[i] > field.values[best]) best = i;
  }
  const std::int64_t y = static_cast<std::int64_t>(best) / field.width;
  const std::int64_t x = static_cast<std::int64_t>(best) % field.width;
  return CellCoord{field.origin.x + x, field.origin.y + y};
}

double cell_distance_sq(const CellCoord& a, const CellCoord& b) {
  const double dx = static_cast<double>(a.x - b.x);
  const double dy = static_cast<double>(a.y - b.y);
  return dx * dx + dy * dy;
}

}  // namespace

std::optional<CellCoord> select_waypoint(const ValueMap& field,
                                         const std::vector<CellCoord>& frontiers) {
  if (frontiers.empty() || field.values.empty()) return std::nullopt;
  const CellCoord peak = field_argmax(field);

  std::vector<CellCoord> sorted = frontiers;
  std::sort(sorted.begin(), sorted.end(), row_major_less);
  CellCoord best = sorted.front();
  double best_dist = std::numeric_limits<double>::infinity();
  for (const auto& c : sorted) {
    const double d = cell_distance_sq(c, peak);
    if (d < best_dist) {
      best_dist = d;
      best = c;
    }
  }
  return best;
}

std::optional<SituatedPose> localize_situation(const SemanticMap& map,
                                               const std::map<RegionId, double>& region_probs,
                                               const std::map<InstanceId, double>& instance_probs,
                                               double sigma) {
  std::vector<ScoredUnit> region_scored;
  for (const auto& [id, p] : region_probs) {
    if (!map.has_region(id)) throw DataError("unknown region id " + std::to_string(id));
    ScoredUnit s;
    s.kind = UnitKind::Region;
    s.id = id;
    s.score = p;
    s.anchor = map.anchor_cell(UnitKind::Region, id);
    region_scored.push_back(s);
  }
  std::vector<ScoredUnit> instance_scored;
  for (const auto& [id, p] : instance_probs) {
    if (!map.has_instance(id)) throw DataError("unknown instance id " + std::to_string(id));
    ScoredUnit s;
    s.kind = UnitKind::Instance;
    s.id = id;
    s.score = p;
    s.anchor = map.anchor_cell(UnitKind::Instance, id);
    instance_scored.push_back(s);
  }

  const ValueMap region_field = build_value_map(region_scored, map.grid(), sigma);
  const ValueMap instance_field = build_value_map(instance_scored, map.grid(), sigma);
  const bool region_flat =
      std::all_of(region_field.values.begin(), region_field.values.end(),
                  [](double v) { return v == 0.0; });
  const bool instance_flat =
      std::all_of(instance_field.values.begin(), instance_field.values.end(),
                  [](double v) { return v == 0.0; });
  if (region_field.values.empty() || instance_field.values.empty() || region_flat ||
      instance_flat) {
    return std::nullopt;
  }

  const CellCoord region_peak = field_argmax(region_field);

  // Snap to the nearest explored cell; ties resolve row-major.
  bool found = false;
  CellCoord anchor;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const auto& [c, cell] : map.grid().cells) {
    if (cell.state == CellState::Unexplored) continue;
    const double d = cell_distance_sq(c, region_peak);
    const bool better =
        !found || d < best_dist || (d == best_dist && row_major_less(c, anchor));
    if (better) {
      found = true;
      best_dist = d;
      anchor = c;
    }
  }
  if (!found) return std::nullopt;

  const CellCoord facing = field_argmax(instance_field);

  SituatedPose pose;
  pose.position = anchor;
  if (facing == anchor) {
    pose.orientation = 0.0;
    pose.degenerate = true;
  } else {
    const double dx = static_cast<double>(facing.x - anchor.x) * map.grid().cell_size;
    const double dy = static_cast<double>(facing.y - anchor.y) * map.grid().cell_size;
    pose.orientation = std::atan2(dy, dx);
  }
  return pose;
}

std::array<LabeledView, 4> render_four_views(const SemanticMap& map, const SituatedPose& pose,
                                             const CameraIntrinsics& intrinsics,
                                             double agent_height, double near, double far) {
  GaussianSet all;
  for (const auto& [id, unit] : map.instances()) {
    (void)id;
    all.insert(all.end(), unit.gaussians.begin(), unit.gaussians.end());
  }

  const Eigen::Vector2d center = map.grid().cell_center(pose.position);
  const Eigen::Vector3d position(center.x(), center.y(), agent_height);
  const double theta = pose.orientation;
  const std::array<std::pair<std::string, double>, 4> yaws{{
      {"front", theta},
      {"back", theta + M_PI},
      {"left", theta + M_PI / 2.0},
      {"right", theta - M_PI / 2.0},
  }};

  std::array<LabeledView, 4> views;
  for (std::size_t i = 0; i < views.size(); ++i) {
    views[i].label = yaws[i].first;
    views[i].camera.intrinsics = intrinsics;
    views[i].camera.pose = make_level_pose(position, yaws[i].second);
    views[i].camera.near = near;
    views[i].camera.far = far;
    views[i].image = render(all, views[i].camera);
  }
  return views;
}

}  // namespace gsmap
