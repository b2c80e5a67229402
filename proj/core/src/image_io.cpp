#include "gsmap/image_io.hpp"

#include "gsmap/errors.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

namespace gsmap {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct PngReader {
  png_structp png = nullptr;
  png_infop info = nullptr;

  ~PngReader() { png_destroy_read_struct(&png, &info, nullptr); }
};

struct PngWriter {
  png_structp png = nullptr;
  png_infop info = nullptr;

  ~PngWriter() { png_destroy_write_struct(&png, &info); }
};

void open_read(PngReader& r, std::FILE* file, const std::filesystem::path& path) {
  r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!r.png) throw DataError("png: allocation failed");
  r.info = png_create_info_struct(r.png);
  if (!r.info) throw DataError("png: allocation failed");
  if (setjmp(png_jmpbuf(r.png))) throw DataError("png: failed to read " + path.string());
  png_init_io(r.png, file);
  png_read_info(r.png, r.info);
}

template <typename Row>
void read_rows(png_structp png, int height, std::vector<Row>& rows) {
  std::vector<png_bytep> pointers(height);
  for (int y = 0; y < height; ++y) {
    pointers[y] = reinterpret_cast<png_bytep>(rows[y].data());
  }
  png_read_image(png, pointers.data());
  png_read_end(png, nullptr);
}

}  // namespace

Image16 read_png16(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.string().c_str(), "rb"));
  if (!file) throw DataError("png: cannot open " + path.string());

  PngReader r;
  open_read(r, file.get(), path);
  const int width = static_cast<int>(png_get_image_width(r.png, r.info));
  const int height = static_cast<int>(png_get_image_height(r.png, r.info));
  if (png_get_color_type(r.png, r.info) != PNG_COLOR_TYPE_GRAY ||
      png_get_bit_depth(r.png, r.info) != 16) {
    throw DataError("png: " + path.string() + " is not 16-bit grayscale");
  }
  png_set_swap(r.png);  // PNG stores big-endian samples
  png_read_update_info(r.png, r.info);

  std::vector<std::vector<std::uint16_t>> rows(height, std::vector<std::uint16_t>(width));
  if (setjmp(png_jmpbuf(r.png))) throw DataError("png: failed to read " + path.string());
  read_rows(r.png, height, rows);

  Image16 out;
  out.width = width;
  out.height = height;
  out.values.resize(static_cast<std::size_t>(width) * height);
  for (int y = 0; y < height; ++y) {
    std::copy(rows[y].begin(), rows[y].end(),
              out.values.begin() + static_cast<std::size_t>(y) * width);
  }
  return out;
}

void write_png16(const std::filesystem::path& path, const Image16& image) {
  if (image.values.size() != static_cast<std::size_t>(image.width) * image.height) {
    throw std::invalid_argument("png: image size mismatch");
  }
  FilePtr file(std::fopen(path.string().c_str(), "wb"));
  if (!file) throw DataError("png: cannot open " + path.string() + " for writing");

  PngWriter w;
  w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!w.png) throw DataError("png: allocation failed");
  w.info = png_create_info_struct(w.png);
  if (!w.info) throw DataError("png: allocation failed");
  if (setjmp(png_jmpbuf(w.png))) throw DataError("png: failed to write " + path.string());

  png_init_io(w.png, file.get());
  png_set_IHDR(w.png, w.info, image.width, image.height, 16, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(w.png, w.info);
  png_set_swap(w.png);
  for (int y = 0; y < image.height; ++y) {
    png_write_row(w.png, reinterpret_cast<png_const_bytep>(
                             image.values.data() + static_cast<std::size_t>(y) * image.width));
  }
  png_write_end(w.png, nullptr);
}

ImageRgb8 read_png_rgb8(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.string().c_str(), "rb"));
  if (!file) throw DataError("png: cannot open " + path.string());

  PngReader r;
  open_read(r, file.get(), path);
  png_set_expand(r.png);
  png_set_strip_16(r.png);
  png_set_strip_alpha(r.png);
  png_set_gray_to_rgb(r.png);
  png_read_update_info(r.png, r.info);
  const int width = static_cast<int>(png_get_image_width(r.png, r.info));
  const int height = static_cast<int>(png_get_image_height(r.png, r.info));
  if (png_get_channels(r.png, r.info) != 3) {
    throw DataError("png: " + path.string() + " did not decode to RGB");
  }

  std::vector<std::vector<std::uint8_t>> rows(height,
                                              std::vector<std::uint8_t>(3 * std::size_t(width)));
  if (setjmp(png_jmpbuf(r.png))) throw DataError("png: failed to read " + path.string());
  read_rows(r.png, height, rows);

  ImageRgb8 out;
  out.width = width;
  out.height = height;
  out.values.resize(3 * static_cast<std::size_t>(width) * height);
  for (int y = 0; y < height; ++y) {
    std::copy(rows[y].begin(), rows[y].end(),
              out.values.begin() + 3 * static_cast<std::size_t>(y) * width);
  }
  return out;
}

void write_png_rgb8(const std::filesystem::path& path, const ImageRgb8& image) {
  if (image.values.size() != 3 * static_cast<std::size_t>(image.width) * image.height) {
    throw std::invalid_argument("png: image size mismatch");
  }
  FilePtr file(std::fopen(path.string().c_str(), "wb"));
  if (!file) throw DataError("png: cannot open " + path.string() + " for writing");

  PngWriter w;
  w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!w.png) throw DataError("png: allocation failed");
  w.info = png_create_info_struct(w.png);
  if (!w.info) throw DataError("png: allocation failed");
  if (setjmp(png_jmpbuf(w.png))) throw DataError("png: failed to write " + path.string());

  png_init_io(w.png, file.get());
  png_set_IHDR(w.png, w.info, image.width, image.height, 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(w.png, w.info);
  for (int y = 0; y < image.height; ++y) {
    png_write_row(w.png, image.values.data() + 3 * static_cast<std::size_t>(y) * image.width);
  }
  png_write_end(w.png, nullptr);
}

BinaryMask read_mask_png(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.string().c_str(), "rb"));
  if (!file) throw DataError("png: cannot open " + path.string());

  PngReader r;
  open_read(r, file.get(), path);
  png_set_expand(r.png);
  png_set_strip_16(r.png);
  png_set_strip_alpha(r.png);
  png_set_rgb_to_gray(r.png, 1, -1.0, -1.0);
  png_read_update_info(r.png, r.info);
  const int width = static_cast<int>(png_get_image_width(r.png, r.info));
  const int height = static_cast<int>(png_get_image_height(r.png, r.info));
  if (png_get_channels(r.png, r.info) != 1) {
    throw DataError("png: " + path.string() + " did not decode to grayscale");
  }

  std::vector<std::vector<std::uint8_t>> rows(height, std::vector<std::uint8_t>(width));
  if (setjmp(png_jmpbuf(r.png))) throw DataError("png: failed to read " + path.string());
  read_rows(r.png, height, rows);

  BinaryMask mask;
  mask.width = width;
  mask.height = height;
  mask.bits.resize(static_cast<std::size_t>(width) * height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      mask.bits[static_cast<std::size_t>(y) * width + x] = rows[y][x] != 0 ? 1 : 0;
    }
  }
  return mask;
}

void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask) {
  FilePtr file(std::fopen(path.string().c_str(), "wb"));
  if (!file) throw DataError("png: cannot open " + path.string() + " for writing");

  PngWriter w;
  w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!w.png) throw DataError("png: allocation failed");
  w.info = png_create_info_struct(w.png);
  if (!w.info) throw DataError("png: allocation failed");
  if (setjmp(png_jmpbuf(w.png))) throw DataError("png: failed to write " + path.string());

  png_init_io(w.png, file.get());
  png_set_IHDR(w.png, w.info, mask.width, mask.height, 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(w.png, w.info);
  std::vector<std::uint8_t> row(mask.width);
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      row[x] = mask.bits[static_cast<std::size_t>(y) * mask.width + x] ? 255 : 0;
    }
    png_write_row(w.png, row.data());
  }
  png_write_end(w.png, nullptr);
}

DepthFrame depth_from_millimeters(const Image16& image) {
  DepthFrame depth;
  depth.values.resize(image.values.size());
  for (std::size_t i = 0; i < image.values.size(); ++i) {
    depth.values[i] = image.values[i] == 0 ? 0.0f : static_cast<float>(image.values[i]) / 1000.0f;
  }
  return depth;
}

Image16 depth_to_millimeters(const DepthFrame& depth) {
  Image16 image;
  image.width = depth.intrinsics.width;
  image.height = depth.intrinsics.height;
  image.values.resize(depth.values.size());
  for (std::size_t i = 0; i < depth.values.size(); ++i) {
    const float d = depth.values[i];
    if (!(d > 0.0f) || !std::isfinite(d)) {
      image.values[i] = 0;
      continue;
    }
    const double mm = std::round(static_cast<double>(d) * 1000.0);
    image.values[i] = static_cast<std::uint16_t>(std::clamp(mm, 0.0, 65535.0));
  }
  return image;
}

ColorFrame color_from_rgb8(const ImageRgb8& image) {
  ColorFrame color;
  color.width = image.width;
  color.height = image.height;
  color.pixels.resize(static_cast<std::size_t>(image.width) * image.height);
  for (std::size_t i = 0; i < color.pixels.size(); ++i) {
    color.pixels[i] = Eigen::Vector3f(image.values[3 * i] / 255.0f,
                                      image.values[3 * i + 1] / 255.0f,
                                      image.values[3 * i + 2] / 255.0f);
  }
  return color;
}

ImageRgb8 color_to_rgb8(const ColorFrame& color) {
  ImageRgb8 image;
  image.width = color.width;
  image.height = color.height;
  image.values.resize(3 * color.pixels.size());
  for (std::size_t i = 0; i < color.pixels.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      const float v = std::clamp(color.pixels[i](c), 0.0f, 1.0f);
      image.values[3 * i + c] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
    }
  }
  return image;
}

ImageRgb8 image_to_rgb8(const ImageBuffer& image) {
  ImageRgb8 out;
  out.width = image.width;
  out.height = image.height;
  out.values.resize(3 * image.pixels.size());
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      const float v = std::clamp(image.pixels[i](c), 0.0f, 1.0f);
      out.values[3 * i + c] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
    }
  }
  return out;
}

void write_pgm16(const std::filesystem::path& path, const ValueMap& field) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("pgm: cannot open " + path.string() + " for writing");
  const std::int64_t width = std::max<std::int64_t>(field.width, 1);
  const std::int64_t height = std::max<std::int64_t>(field.height, 1);
  out << "P5\n" << width << " " << height << "\n65535\n";
  std::vector<std::uint8_t> row(2 * static_cast<std::size_t>(width), 0);
  for (std::int64_t y = 0; y < height; ++y) {
    for (std::int64_t x = 0; x < width; ++x) {
      std::uint16_t sample = 0;
      if (y < field.height && x < field.width) {
        const double v =
            std::clamp(field.values[static_cast<std::size_t>(y) * field.width + x], 0.0, 1.0);
        sample = static_cast<std::uint16_t>(std::lround(v * 65535.0));
      }
      row[2 * x] = static_cast<std::uint8_t>(sample >> 8);  // big-endian samples
      row[2 * x + 1] = static_cast<std::uint8_t>(sample & 0xff);
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw DataError("pgm: failed to write " + path.string());
}

void write_value_png(const std::filesystem::path& path, const ValueMap& field) {
  ImageRgb8 image;
  image.width = static_cast<int>(std::max<std::int64_t>(field.width, 1));
  image.height = static_cast<int>(std::max<std::int64_t>(field.height, 1));
  image.values.assign(3 * static_cast<std::size_t>(image.width) * image.height, 0);
  for (std::int64_t y = 0; y < field.height; ++y) {
    for (std::int64_t x = 0; x < field.width; ++x) {
      const double v =
          std::clamp(field.values[static_cast<std::size_t>(y) * field.width + x], 0.0, 1.0);
      // Simple black -> red -> yellow -> white ramp.
      const double r = std::clamp(v * 3.0, 0.0, 1.0);
      const double g = std::clamp(v * 3.0 - 1.0, 0.0, 1.0);
      const double b = std::clamp(v * 3.0 - 2.0, 0.0, 1.0);
      const std::size_t i = 3 * (static_cast<std::size_t>(y) * image.width + x);
      image.values[i] = static_cast<std::uint8_t>(std::lround(r * 255.0));
      image.values[i + 1] = static_cast<std::uint8_t>(std::lround(g * 255.0));
      image.values[i + 2] = static_cast<std::uint8_t>(std::lround(b * 255.0));
    }
  }
  write_png_rgb8(path, image);
}

}  // namespace gsmap
