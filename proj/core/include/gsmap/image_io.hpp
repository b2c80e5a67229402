#pragma once

#include "gsmap/camera.hpp"
#include "gsmap/image.hpp"
#include "gsmap/query.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace gsmap {

/// 16-bit single-channel image, row-major from the top-left.
struct Image16 {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> values;
};

/// 8-bit RGB image, row-major interleaved.
struct ImageRgb8 {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;  // 3 * width * height
};

Image16 read_png16(const std::filesystem::path& path);
void write_png16(const std::filesystem::path& path, const Image16& image);

ImageRgb8 read_png_rgb8(const std::filesystem::path& path);
void write_png_rgb8(const std::filesystem::path& path, const ImageRgb8& image);

/// Grayscale 8-bit read; nonzero pixels are set bits.
BinaryMask read_mask_png(const std::filesystem::path& path);
void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask);

/// Depth-on-disk convention: 16-bit millimeters, zero meaning no return.
DepthFrame depth_from_millimeters(const Image16& image);
Image16 depth_to_millimeters(const DepthFrame& depth);

/// Color-on-disk convention: 8-bit sRGB values scaled linearly to [0,1].
ColorFrame color_from_rgb8(const ImageRgb8& image);
ImageRgb8 color_to_rgb8(const ColorFrame& color);

ImageRgb8 image_to_rgb8(const ImageBuffer& image);

/// Binary (P5) PGM with 16-bit samples, big-endian per the format; values
/// in [0,1] scale to the full range.
void write_pgm16(const std::filesystem::path& path, const ValueMap& field);

/// Heat-shaded PNG of the same field for eyeballing.
void write_value_png(const std::filesystem::path& path, const ValueMap& field);

}  // namespace gsmap
