#include "scene.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>

int main(int argc, char** argv) {
  CLI::App app{"Synthetic box-scene dataset generator"};
  std::string kind = "fixture";
  std::string out_dir;
  int frames = 10;
  app.add_option("--kind", kind, "Scene kind: fixture, sweep, or perf")
      ->check(CLI::IsMember({"fixture", "sweep", "perf"}));
  app.add_option("--out", out_dir, "Output dataset directory")->required();
  app.add_option("--frames", frames, "Frame count (sweep only)")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    scenegen::GeneratedScene g;
    if (kind == "fixture") {
      g = scenegen::fixture_scene();
    } else if (kind == "sweep") {
      g = scenegen::sweep_scene(frames);
    } else {
      g = scenegen::perf_scene();
    }
    const auto manifest = scenegen::write_dataset(out_dir, g.scene, g.intrinsics, g.frames);
    std::printf("%s\n", manifest.string().c_str());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
