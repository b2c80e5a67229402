#pragma once

#include <Eigen/Core>

#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <set>

namespace gsmap {

struct CellCoord {
  std::int64_t x = 0;
  std::int64_t y = 0;
  auto operator<=>(const CellCoord&) const = default;
};

/// Ordering used wherever ties resolve to the "lowest" cell: by row (y),
/// then by column (x).
inline bool row_major_less(const CellCoord& a, const CellCoord& b) {
  if (a.y != b.y) return a.y < b.y;
  return a.x < b.x;
}

enum class CellState : std::uint8_t { Unexplored = 0, Free = 1, Occupied = 2 };

struct GridCell {
  std::set<std::uint32_t> instances;
  std::set<std::uint32_t> regions;
  CellState state = CellState::Unexplored;
};

/// Sparse 2D index over the ground plane.  Cells never stored are
/// unexplored.  Occupancy only upgrades: unexplored -> free -> occupied.
struct IndexGrid {
  double cell_size = 0.05;  // meters
  std::map<CellCoord, GridCell> cells;

  CellCoord cell_of(double x, double y) const {
    return CellCoord{static_cast<std::int64_t>(std::floor(x / cell_size)),
                     static_cast<std::int64_t>(std::floor(y / cell_size))};
  }
  CellCoord cell_of(const Eigen::Vector2d& p) const { return cell_of(p.x(), p.y()); }

  Eigen::Vector2d cell_center(const CellCoord& c) const {
    return Eigen::Vector2d((static_cast<double>(c.x) + 0.5) * cell_size,
                           (static_cast<double>(c.y) + 0.5) * cell_size);
  }

  CellState state_at(const CellCoord& c) const {
    auto it = cells.find(c);
    return it == cells.end() ? CellState::Unexplored : it->second.state;
  }

  void upgrade_state(const CellCoord& c, CellState s) {
    GridCell& cell = cells[c];
    if (static_cast<std::uint8_t>(s) > static_cast<std::uint8_t>(cell.state)) cell.state = s;
  }
};

}  // namespace gsmap
