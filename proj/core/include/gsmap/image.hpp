#pragma once

#include <Eigen/Core>

#include <vector>

namespace gsmap {

/// Float RGBA raster, components in [0,1], row-major from the top-left.
struct ImageBuffer {
  int width = 0;
  int height = 0;
  std::vector<Eigen::Vector4f> pixels;

  static ImageBuffer filled(int width, int height, const Eigen::Vector4f& value) {
    ImageBuffer img;
    img.width = width;
    img.height = height;
    img.pixels.assign(static_cast<std::size_t>(width) * height, value);
    return img;
  }

  Eigen::Vector4f& at(int u, int v) { return pixels[static_cast<std::size_t>(v) * width + u]; }
  const Eigen::Vector4f& at(int u, int v) const {
    return pixels[static_cast<std::size_t>(v) * width + u];
  }
};

}  // namespace gsmap
