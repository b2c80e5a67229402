#include <gsmap/archive.hpp>
#include <gsmap/config.hpp>
#include <gsmap/dataset.hpp>
#include <gsmap/errors.hpp>
#include <gsmap/image_io.hpp>
#include <gsmap/map.hpp>
#include <gsmap/ply_io.hpp>
#include <gsmap/query.hpp>
#include <gsmap/renderer.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <string>

namespace {

using namespace gsmap;

CameraIntrinsics view_intrinsics() {
  CameraIntrinsics intr;
  intr.fx = 240.0;
  intr.fy = 240.0;
  intr.cx = 160.0;
  intr.cy = 120.0;
  intr.width = 320;
  intr.height = 240;
  return intr;
}

GaussianSet unit_gaussians(const SemanticMap& map, const std::string& kind, std::uint32_t id) {
  GaussianSet out;
  if (kind == "instance") {
    out = map.instance(id).gaussians;
  } else {
    for (InstanceId member : map.region(id).members) {
      const auto& g = map.instance(member).gaussians;
      out.insert(out.end(), g.begin(), g.end());
    }
  }
  return out;
}

void write_camera_sidecar(const std::filesystem::path& image_path, const RenderCamera& camera) {
  std::ofstream out(image_path.string() + ".camera.txt");
  out.precision(17);
  out << "fx " << camera.intrinsics.fx << "\nfy " << camera.intrinsics.fy << "\ncx "
      << camera.intrinsics.cx << "\ncy " << camera.intrinsics.cy << "\nwidth "
      << camera.intrinsics.width << "\nheight " << camera.intrinsics.height << "\n";
  out << "pose";
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) out << " " << camera.pose.rotation(r, c);
    out << " " << camera.pose.translation(r);
  }
  out << "\nnear " << camera.near << "\nfar " << camera.far << "\n";
}

int run_build(const std::string& manifest_path, const std::string& out_path,
              const std::string& config_path) {
  MapConfig config = config_path.empty() ? MapConfig::defaults() : load_map_config(config_path);
  const Dataset dataset = load_dataset(manifest_path);

  SemanticMap map(config.cell_size);
  MockEmbedder embedder;
  MockSummarizer summarizer;
  for (std::size_t i = 0; i < dataset.frames.size(); ++i) {
    const FrameInput frame = load_frame(dataset, i);
    const IngestReport report = map.ingest_frame(frame, config, embedder, summarizer);
    std::fprintf(stderr, "ingested %s: %zu instances, %zu regions mapped",
                 dataset.frames[i].frame_id.c_str(), report.instance_mapping.size(),
                 report.region_mapping.size());
    if (!report.skipped_instances.empty()) {
      std::fprintf(stderr, ", %zu skipped", report.skipped_instances.size());
    }
    std::fprintf(stderr, "\n");
  }
  save_map(out_path, map, config);
  std::fprintf(stderr, "map: %zu instances, %zu regions\n", map.instances().size(),
               map.regions().size());
  std::printf("%s\n", out_path.c_str());
  return 0;
}

int run_stats(const std::string& map_path) {
  const LoadedMap loaded = load_map(map_path);
  const SemanticMap& map = loaded.map;

  std::size_t gaussians = 0;
  std::uint64_t support = 0;
  for (const auto& [id, unit] : map.instances()) {
    (void)id;
    gaussians += unit.gaussians.size();
    support += total_support(unit.gaussians);
  }
  std::size_t free_cells = 0;
  std::size_t occupied_cells = 0;
  for (const auto& [coord, cell] : map.grid().cells) {
    (void)coord;
    if (cell.state == CellState::Free) ++free_cells;
    if (cell.state == CellState::Occupied) ++occupied_cells;
  }

  std::printf("instances: %zu\n", map.instances().size());
  std::printf("regions: %zu\n", map.regions().size());
  std::printf("gaussians: %zu\n", gaussians);
  std::printf("total_support: %llu\n", static_cast<unsigned long long>(support));
  std::printf("cells: %zu\n", map.grid().cells.size());
  std::printf("free_cells: %zu\n", free_cells);
  std::printf("occupied_cells: %zu\n", occupied_cells);
  std::printf("frontiers: %zu\n", detect_frontiers(map.grid()).size());
  return 0;
}

int run_value_map(const std::string& map_path, const std::string& goal, const std::string& out,
                  double sigma) {
  const LoadedMap loaded = load_map(map_path);
  MockScorer scorer;
  const auto scored = score_units(loaded.map, goal, scorer);
  const ValueMap field = build_value_map(scored, loaded.map.grid(), sigma);
  write_pgm16(out, field);

  nlohmann::json j;
  j["origin"] = {field.origin.x, field.origin.y};
  j["width"] = field.width;
  j["height"] = field.height;
  j["normalizer"] = field.normalizer;
  std::int64_t peak_x = field.origin.x;
  std::int64_t peak_y = field.origin.y;
  double peak = -1.0;
  for (std::int64_t y = 0; y < field.height; ++y) {
    for (std::int64_t x = 0; x < field.width; ++x) {
      const double v = field.values[static_cast<std::size_t>(y) * field.width + x];
      if (v > peak) {
        peak = v;
        peak_x = field.origin.x + x;
        peak_y = field.origin.y + y;
      }
    }
  }
  j["peak"] = {peak_x, peak_y};
  std::printf("%s\n", j.dump().c_str());
  return 0;
}

int run_waypoint(const std::string& map_path, const std::string& goal, double sigma) {
  const LoadedMap loaded = load_map(map_path);
  MockScorer scorer;
  const auto scored = score_units(loaded.map, goal, scorer);
  const ValueMap field = build_value_map(scored, loaded.map.grid(), sigma);
  const auto frontiers = detect_frontiers(loaded.map.grid());
  const auto waypoint = select_waypoint(field, frontiers);
  if (!waypoint) throw DataError("no frontiers available for a waypoint");

  const Eigen::Vector2d position = loaded.map.grid().cell_center(*waypoint);
  nlohmann::json j;
  j["cell"] = {waypoint->x, waypoint->y};
  j["position"] = {position.x(), position.y()};
  std::printf("%s\n", j.dump().c_str());
  return 0;
}

int run_render(const std::string& map_path, std::uint32_t id, const std::string& kind,
               const std::string& out) {
  const LoadedMap loaded = load_map(map_path);
  const GaussianSet gaussians = unit_gaussians(loaded.map, kind, id);
  if (gaussians.empty()) throw DataError("unit has no Gaussians to render");

  ViewpointConfig vp;
  vp.agent_height = loaded.config.agent_height;
  const RenderCamera camera =
      select_viewpoint(gaussians, loaded.map.grid(), view_intrinsics(), vp);
  const ImageBuffer image = render(gaussians, camera);
  write_png_rgb8(out, image_to_rgb8(image));
  write_camera_sidecar(out, camera);
  std::printf("%s\n", out.c_str());
  return 0;
}

int run_localize(const std::string& map_path, const std::string& probs_path,
                 const std::string& out_dir, double sigma) {
  const LoadedMap loaded = load_map(map_path);

  std::ifstream in(probs_path);
  if (!in) throw DataError("probs: cannot open " + probs_path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("probs: " + probs_path + ": " + e.what());
  }
  std::map<RegionId, double> region_probs;
  std::map<InstanceId, double> instance_probs;
  try {
    const nlohmann::json regions = j.value("regions", nlohmann::json::object());
    for (const auto& [key, v] : regions.items()) {
      region_probs[static_cast<RegionId>(std::stoul(key))] = v.get<double>();
    }
    const nlohmann::json instances = j.value("instances", nlohmann::json::object());
    for (const auto& [key, v] : instances.items()) {
      instance_probs[static_cast<InstanceId>(std::stoul(key))] = v.get<double>();
    }
  } catch (const std::exception& e) {
    throw DataError("probs: " + probs_path + ": " + e.what());
  }

  const auto pose = localize_situation(loaded.map, region_probs, instance_probs, sigma);
  if (!pose) throw DataError("localization failed: probability fields are empty");

  std::filesystem::create_directories(out_dir);
  const auto views = render_four_views(loaded.map, *pose, view_intrinsics(),
                                       loaded.config.agent_height);
  for (const auto& view : views) {
    write_png_rgb8(std::filesystem::path(out_dir) / (view.label + ".png"),
                   image_to_rgb8(view.image));
  }

  const Eigen::Vector2d position = loaded.map.grid().cell_center(pose->position);
  nlohmann::json out;
  out["cell"] = {pose->position.x, pose->position.y};
  out["position"] = {position.x(), position.y()};
  out["theta"] = pose->orientation;
  out["degenerate"] = pose->degenerate;
  std::ofstream pose_out(std::filesystem::path(out_dir) / "pose.json");
  pose_out << out.dump(2) << "\n";
  std::printf("%s\n", out.dump().c_str());
  return 0;
}

int run_export_splats(const std::string& map_path, const std::string& out) {
  const LoadedMap loaded = load_map(map_path);
  GaussianSet all;
  for (const auto& [id, unit] : loaded.map.instances()) {
    (void)id;
    all.insert(all.end(), unit.gaussians.begin(), unit.gaussians.end());
  }
  write_splat_ply(out, all);
  std::fprintf(stderr, "exported %zu splats\n", all.size());
  std::printf("%s\n", out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian semantic map tool"};
  app.require_subcommand(1);

  auto* build = app.add_subcommand("build", "Ingest a dataset into a map archive");
  std::string manifest_path, build_out, config_path;
  build->add_option("--manifest", manifest_path, "Dataset manifest JSON")->required();
  build->add_option("--out", build_out, "Output archive path")->required();
  build->add_option("--config", config_path, "Config JSON");

  auto* stats = app.add_subcommand("stats", "Print archive summary");
  std::string map_path;
  stats->add_option("--map", map_path, "Map archive")->required();

  auto* value_map = app.add_subcommand("value-map", "Write a goal relevance field as PGM");
  std::string vm_map, vm_goal, vm_out;
  double vm_sigma = 0.5;
  value_map->add_option("--map", vm_map, "Map archive")->required();
  value_map->add_option("--goal", vm_goal, "Goal text")->required();
  value_map->add_option("--out", vm_out, "Output PGM path")->required();
  value_map->add_option("--sigma", vm_sigma, "Kernel width in meters")->check(CLI::PositiveNumber);

  auto* waypoint = app.add_subcommand("waypoint", "Pick the exploration frontier for a goal");
  std::string wp_map, wp_goal;
  double wp_sigma = 0.5;
  waypoint->add_option("--map", wp_map, "Map archive")->required();
  waypoint->add_option("--goal", wp_goal, "Goal text")->required();
  waypoint->add_option("--sigma", wp_sigma, "Kernel width in meters")->check(CLI::PositiveNumber);

  auto* render_cmd = app.add_subcommand("render", "Render one unit from an auto-chosen viewpoint");
  std::string r_map, r_kind = "instance", r_out;
  std::uint32_t r_id = 0;
  render_cmd->add_option("--map", r_map, "Map archive")->required();
  render_cmd->add_option("--unit", r_id, "Unit id")->required();
  render_cmd->add_option("--kind", r_kind, "instance or region")
      ->check(CLI::IsMember({"instance", "region"}));
  render_cmd->add_option("--out", r_out, "Output PNG path")->required();

  auto* localize = app.add_subcommand("localize", "Infer a situated pose and render four views");
  std::string l_map, l_probs, l_out_dir;
  double l_sigma = 0.5;
  localize->add_option("--map", l_map, "Map archive")->required();
  localize->add_option("--probs", l_probs, "Probability JSON")->required();
  localize->add_option("--out-dir", l_out_dir, "Output directory")->required();
  localize->add_option("--sigma", l_sigma, "Kernel width in meters")->check(CLI::PositiveNumber);

  auto* export_splats = app.add_subcommand("export-splats", "Write all splats as a PLY");
  std::string e_map, e_out;
  export_splats->add_option("--map", e_map, "Map archive")->required();
  export_splats->add_option("--out", e_out, "Output PLY path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (build->parsed()) return run_build(manifest_path, build_out, config_path);
    if (stats->parsed()) return run_stats(map_path);
    if (value_map->parsed()) return run_value_map(vm_map, vm_goal, vm_out, vm_sigma);
    if (waypoint->parsed()) return run_waypoint(wp_map, wp_goal, wp_sigma);
    if (render_cmd->parsed()) return run_render(r_map, r_id, r_kind, r_out);
    if (localize->parsed()) return run_localize(l_map, l_probs, l_out_dir, l_sigma);
    if (export_splats->parsed()) return run_export_splats(e_map, e_out);
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const InvariantError& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 3;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 3;
  }
  return 1;
}
