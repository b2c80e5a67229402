#include "gsmap/map.hpp"

#include "gsmap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace gsmap {

namespace {

std::string gaussian_key(const Gaussian3D& g) {
  std::string key(17 * sizeof(double) + sizeof(std::uint64_t), '\0');
  char* out = key.data();
  auto put = [&out](const void* src, std::size_t bytes) {
    std::memcpy(out, src, bytes);
    out += bytes;
  };
  put(g.mean.data(), 3 * sizeof(double));
  put(g.covariance.data(), 9 * sizeof(double));
  put(g.color.data(), 3 * sizeof(double));
  put(&g.opacity, sizeof(double));
  put(&g.support, sizeof(std::uint64_t));
  return key;
}

std::string merged_unit_text(const std::string& existing, const std::string& incoming,
                             std::size_t limit, const SummarizerContract& summarizer) {
  std::string merged = existing + "; " + incoming;
  if (merged.size() <= limit) return merged;
  std::string out = summarizer.summarize(merged, limit);
  if (out.size() > limit) throw InvariantError("summarizer exceeded the text budget");
  return out;
}

struct VoxelCoordHash {
  std::size_t operator()(const VoxelCoord& v) const {
    auto mix = [](std::uint64_t x) {
      x ^= x >> 33;
      x *= 0xff51afd7ed558ccdULL;
      x ^= x >> 33;
      return x;
    };
    std::uint64_t h = mix(static_cast<std::uint64_t>(v.x));
    h = mix(h ^ static_cast<std::uint64_t>(v.y) * 0x9e3779b97f4a7c15ULL);
    h = mix(h ^ static_cast<std::uint64_t>(v.z) * 0xc2b2ae3d27d4eb4fULL);
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

PointCloud extract_instance_cloud(const DepthFrame& depth, const ColorFrame& color,
                                  const BinaryMask& mask) {
  return back_project(depth, color, mask);
}

const InstanceUnit& SemanticMap::instance(InstanceId id) const {
  auto it = instances_.find(id);
  if (it == instances_.end()) throw DataError("unknown instance id " + std::to_string(id));
  return it->second;
}

const RegionUnit& SemanticMap::region(RegionId id) const {
  auto it = regions_.find(id);
  if (it == regions_.end()) throw DataError("unknown region id " + std::to_string(id));
  return it->second;
}

const std::vector<CellCoord>& SemanticMap::footprint(UnitKind kind, std::uint32_t id) const {
  if (kind == UnitKind::Instance) {
    auto it = instance_footprints_.find(id);
    if (it == instance_footprints_.end()) {
      throw DataError("unknown instance id " + std::to_string(id));
    }
    return it->second;
  }
  auto it = region_footprints_.find(id);
  if (it == region_footprints_.end()) throw DataError("unknown region id " + std::to_string(id));
  return it->second;
}

CellCoord SemanticMap::anchor_cell(UnitKind kind, std::uint32_t id) const {
  const auto& cells = footprint(kind, id);
  if (cells.empty()) throw InvariantError("anchor of a unit with an empty footprint");
  double sx = 0.0;
  double sy = 0.0;
  for (const auto& c : cells) {
    sx += static_cast<double>(c.x);
    sy += static_cast<double>(c.y);
  }
  const double n = static_cast<double>(cells.size());
  return CellCoord{std::llround(sx / n), std::llround(sy / n)};
}

std::optional<InstanceId> SemanticMap::match_instance(const InstanceObservation& candidate,
                                                      const MapConfig& config) const {
  const double voxel = config.estimator.voxel_size;
  for (const auto& [id, unit] : instances_) {
    if (!(cosine(candidate.embedding, unit.embedding) > config.tau_s)) continue;

    std::unordered_map<VoxelCoord, std::vector<std::uint32_t>, VoxelCoordHash> hash;
    for (std::uint32_t k = 0; k < unit.gaussians.size(); ++k) {
      hash[voxel_of(unit.gaussians[k].mean, voxel)].push_back(k);
    }
    for (const auto& g : candidate.gaussians) {
      const VoxelCoord c = voxel_of(g.mean, voxel);
      for (std::int64_t dx = -2; dx <= 2; ++dx) {
        for (std::int64_t dy = -2; dy <= 2; ++dy) {
          for (std::int64_t dz = -2; dz <= 2; ++dz) {
            auto it = hash.find(VoxelCoord{c.x + dx, c.y + dy, c.z + dz});
            if (it == hash.end()) continue;
            for (std::uint32_t k : it->second) {
              if (mergeable(g, unit.gaussians[k], config.estimator)) return id;
            }
          }
        }
      }
    }
  }
  return std::nullopt;
}

void SemanticMap::merge_into_instance(InstanceId target, const InstanceObservation& candidate,
                                      const MapConfig& config, const EmbedderContract& embedder,
                                      const SummarizerContract& summarizer) {
  auto it = instances_.find(target);
  if (it == instances_.end()) throw DataError("unknown instance id " + std::to_string(target));
  InstanceUnit& unit = it->second;

  std::unordered_set<std::string> seen;
  seen.reserve(unit.gaussians.size() + candidate.gaussians.size());
  for (const auto& g : unit.gaussians) seen.insert(gaussian_key(g));
  GaussianSet pool = unit.gaussians;
  for (const auto& g : candidate.gaussians) {
    if (seen.insert(gaussian_key(g)).second) pool.push_back(g);
  }

  unit.gaussians = merge_set(std::move(pool), config.estimator);
  unit.text = merged_unit_text(unit.text, candidate.text, config.buffer_limit, summarizer);
  unit.embedding = embedder.embed(unit.text);

  refresh_instance_footprint(target, config);
  for (const auto& [rid, region] : regions_) {
    if (region.members.count(target)) refresh_region_footprint(rid);
  }
}

InstanceId SemanticMap::register_instance(InstanceObservation candidate, const MapConfig& config) {
  if (candidate.gaussians.empty()) {
    throw std::invalid_argument("register_instance: no Gaussians");
  }
  const InstanceId id = next_instance_id_++;
  InstanceUnit unit;
  unit.id = id;
  unit.gaussians = std::move(candidate.gaussians);
  unit.text = std::move(candidate.text);
  unit.embedding = std::move(candidate.embedding);
  instances_.emplace(id, std::move(unit));
  refresh_instance_footprint(id, config);
  return id;
}

std::optional<RegionId> SemanticMap::match_region(const RegionObservation& candidate,
                                                  const MapConfig& config) const {
  for (const auto& [id, unit] : regions_) {
    if (!(cosine(candidate.embedding, unit.embedding) > config.tau_s)) continue;
    const bool overlap = std::any_of(candidate.members.begin(), candidate.members.end(),
                                     [&](InstanceId m) { return unit.members.count(m) != 0; });
    if (overlap) return id;
  }
  return std::nullopt;
}

void SemanticMap::merge_into_region(RegionId target, const RegionObservation& candidate,
                                    const MapConfig& config, const EmbedderContract& embedder,
                                    const SummarizerContract& summarizer) {
  auto it = regions_.find(target);
  if (it == regions_.end()) throw DataError("unknown region id " + std::to_string(target));
  RegionUnit& unit = it->second;

  unit.members.insert(candidate.members.begin(), candidate.members.end());
  unit.text = merged_unit_text(unit.text, candidate.text, config.buffer_limit, summarizer);
  unit.embedding = embedder.embed(unit.text);
  refresh_region_footprint(target);
}

RegionId SemanticMap::register_region(RegionObservation candidate, const MapConfig& config) {
  (void)config;
  if (candidate.members.empty()) throw std::invalid_argument("register_region: no members");
  for (InstanceId m : candidate.members) {
    if (!instances_.count(m)) {
      throw std::invalid_argument("register_region: unknown member " + std::to_string(m));
    }
  }
  const RegionId id = next_region_id_++;
  RegionUnit unit;
  unit.id = id;
  unit.members = std::move(candidate.members);
  unit.text = std::move(candidate.text);
  unit.embedding = std::move(candidate.embedding);
  regions_.emplace(id, std::move(unit));
  refresh_region_footprint(id);
  return id;
}

IngestReport SemanticMap::ingest_frame(const FrameInput& frame, const MapConfig& config,
                                       const EmbedderContract& embedder,
                                       const SummarizerContract& summarizer) {
  grid_.cell_size = config.cell_size;
  IngestReport report;

  const auto full = BinaryMask::full(frame.depth.intrinsics.width, frame.depth.intrinsics.height);
  update_occupancy(back_project(frame.depth, frame.color, full), config);

  for (const auto& parsed : frame.parse.instances) {
    auto mask_it = frame.masks.find(parsed.local_id);
    if (mask_it == frame.masks.end()) {
      throw DataError("frame " + frame.parse.frame_id + ": missing mask for instance " +
                      std::to_string(parsed.local_id));
    }
    const PointCloud cloud = extract_instance_cloud(frame.depth, frame.color, mask_it->second);
    if (cloud.empty()) {
      report.skipped_instances.push_back(parsed.local_id);
      continue;
    }
    InstanceObservation obs;
    obs.gaussians = estimate(cloud, config.estimator);
    obs.text = parsed.text;
    obs.embedding = embedder.embed(parsed.text);

    if (auto target = match_instance(obs, config)) {
      merge_into_instance(*target, obs, config, embedder, summarizer);
      report.instance_mapping[parsed.local_id] = *target;
    } else {
      report.instance_mapping[parsed.local_id] = register_instance(std::move(obs), config);
    }
  }

  for (const auto& parsed : frame.parse.regions) {
    RegionObservation obs;
    for (int local : parsed.members) {
      auto it = report.instance_mapping.find(local);
      if (it != report.instance_mapping.end()) obs.members.insert(it->second);
    }
    if (obs.members.empty()) {
      report.skipped_regions.push_back(parsed.local_id);
      continue;
    }
    obs.text = parsed.text;
    obs.embedding = embedder.embed(parsed.text);

    if (auto target = match_region(obs, config)) {
      merge_into_region(*target, obs, config, embedder, summarizer);
      report.region_mapping[parsed.local_id] = *target;
    } else {
      report.region_mapping[parsed.local_id] = register_region(std::move(obs), config);
    }
  }
  return report;
}

void SemanticMap::restore(std::map<InstanceId, InstanceUnit> instances,
                          std::map<RegionId, RegionUnit> regions, IndexGrid grid,
                          InstanceId next_instance_id, RegionId next_region_id) {
  instances_ = std::move(instances);
  regions_ = std::move(regions);
  grid_ = std::move(grid);
  next_instance_id_ = next_instance_id;
  next_region_id_ = next_region_id;

  // Footprints are derived state; rebuild them from the grid's id sets so a
  // loaded map is indistinguishable from the one that was saved.
  instance_footprints_.clear();
  region_footprints_.clear();
  for (const auto& [id, unit] : instances_) {
    (void)unit;
    instance_footprints_[id] = {};
  }
  for (const auto& [id, unit] : regions_) {
    (void)unit;
    region_footprints_[id] = {};
  }
  for (const auto& [coord, cell] : grid_.cells) {
    for (InstanceId id : cell.instances) {
      auto it = instance_footprints_.find(id);
      if (it == instance_footprints_.end()) {
        throw DataError("grid references unknown instance id " + std::to_string(id));
      }
      it->second.push_back(coord);
    }
    for (RegionId id : cell.regions) {
      auto it = region_footprints_.find(id);
      if (it == region_footprints_.end()) {
        throw DataError("grid references unknown region id " + std::to_string(id));
      }
      it->second.push_back(coord);
    }
  }
}

bool SemanticMap::deep_equal(const SemanticMap& other) const {
  if (next_instance_id_ != other.next_instance_id_ || next_region_id_ != other.next_region_id_) {
    return false;
  }
  if (grid_.cell_size != other.grid_.cell_size) return false;
  if (grid_.cells.size() != other.grid_.cells.size()) return false;
  for (auto it = grid_.cells.begin(), jt = other.grid_.cells.begin(); it != grid_.cells.end();
       ++it, ++jt) {
    if (it->first != jt->first || it->second.state != jt->second.state ||
        it->second.instances != jt->second.instances || it->second.regions != jt->second.regions) {
      return false;
    }
  }
  if (instances_.size() != other.instances_.size()) return false;
  for (auto it = instances_.begin(), jt = other.instances_.begin(); it != instances_.end();
       ++it, ++jt) {
    const auto& a = it->second;
    const auto& b = jt->second;
    if (it->first != jt->first || a.id != b.id || a.text != b.text ||
        a.embedding.values != b.embedding.values || a.gaussians.size() != b.gaussians.size()) {
      return false;
    }
    for (std::size_t k = 0; k < a.gaussians.size(); ++k) {
      if (!a.gaussians[k].bitwise_equal(b.gaussians[k])) return false;
    }
  }
  if (regions_.size() != other.regions_.size()) return false;
  for (auto it = regions_.begin(), jt = other.regions_.begin(); it != regions_.end(); ++it, ++jt) {
    const auto& a = it->second;
    const auto& b = jt->second;
    if (it->first != jt->first || a.id != b.id || a.text != b.text || a.members != b.members ||
        a.embedding.values != b.embedding.values) {
      return false;
    }
  }
  return true;
}

std::vector<CellCoord> SemanticMap::instance_cells(const InstanceUnit& unit,
                                                   const MapConfig& config) const {
  std::set<CellCoord> cells;
  for (const auto& g : unit.gaussians) {
    const double hx = config.footprint_sigma * std::sqrt(std::max(g.covariance(0, 0), 0.0));
    const double hy = config.footprint_sigma * std::sqrt(std::max(g.covariance(1, 1), 0.0));
    const CellCoord lo = grid_.cell_of(g.mean.x() - hx, g.mean.y() - hy);
    const CellCoord hi = grid_.cell_of(g.mean.x() + hx, g.mean.y() + hy);
    for (std::int64_t y = lo.y; y <= hi.y; ++y) {
      for (std::int64_t x = lo.x; x <= hi.x; ++x) cells.insert(CellCoord{x, y});
    }
  }
  return {cells.begin(), cells.end()};
}

void SemanticMap::refresh_instance_footprint(InstanceId id, const MapConfig& config) {
  auto& stored = instance_footprints_[id];
  for (const auto& c : stored) {
    auto it = grid_.cells.find(c);
    if (it != grid_.cells.end()) it->second.instances.erase(id);
  }
  stored = instance_cells(instances_.at(id), config);
  for (const auto& c : stored) grid_.cells[c].instances.insert(id);
}

void SemanticMap::refresh_region_footprint(RegionId id) {
  auto& stored = region_footprints_[id];
  for (const auto& c : stored) {
    auto it = grid_.cells.find(c);
    if (it != grid_.cells.end()) it->second.regions.erase(id);
  }
  std::set<CellCoord> cells;
  for (InstanceId m : regions_.at(id).members) {
    auto it = instance_footprints_.find(m);
    if (it == instance_footprints_.end()) {
      throw InvariantError("region member without a footprint");
    }
    cells.insert(it->second.begin(), it->second.end());
  }
  stored.assign(cells.begin(), cells.end());
  for (const auto& c : stored) grid_.cells[c].regions.insert(id);
}

void SemanticMap::update_occupancy(const PointCloud& cloud, const MapConfig& config) {
  if (cloud.empty()) return;

  std::vector<double> zs;
  zs.reserve(cloud.size());
  for (const auto& p : cloud.points) zs.push_back(p.z());
  std::sort(zs.begin(), zs.end());
  const std::size_t decile = std::max<std::size_t>(1, zs.size() / 10);

  std::map<std::int64_t, std::size_t> histogram;
  for (std::size_t i = 0; i < decile; ++i) {
    histogram[static_cast<std::int64_t>(std::floor(zs[i] / config.ground_bin))]++;
  }
  std::int64_t mode_bin = histogram.begin()->first;
  std::size_t mode_count = histogram.begin()->second;
  for (const auto& [bin, count] : histogram) {
    if (count > mode_count) {
      mode_bin = bin;
      mode_count = count;
    }
  }
  const double ground = (static_cast<double>(mode_bin) + 0.5) * config.ground_bin;

  std::map<CellCoord, CellState> marks;
  for (const auto& p : cloud.points) {
    const double z = p.z();
    if (z < ground - config.floor_band || z > ground + config.agent_height) continue;
    const CellState state = z > ground + config.floor_band ? CellState::Occupied : CellState::Free;
    auto [it, inserted] = marks.emplace(grid_.cell_of(p.x(), p.y()), state);
    if (!inserted && static_cast<std::uint8_t>(state) > static_cast<std::uint8_t>(it->second)) {
      it->second = state;
    }
  }
  for (const auto& [coord, state] : marks) grid_.upgrade_state(coord, state);
}

}  // namespace gsmap
