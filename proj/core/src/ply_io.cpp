#include "gsmap/ply_io.hpp"

#include "gsmap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace gsmap {

namespace {

enum class PlyType { Float32, Float64, Uint8, Int8, Uint16, Int16, Uint32, Int32 };

std::size_t type_size(PlyType t) {
  switch (t) {
    case PlyType::Float32: return 4;
    case PlyType::Float64: return 8;
    case PlyType::Uint8:
    case PlyType::Int8: return 1;
    case PlyType::Uint16:
    case PlyType::Int16: return 2;
    case PlyType::Uint32:
    case PlyType::Int32: return 4;
  }
  return 0;
}

PlyType parse_type(const std::string& name, const std::filesystem::path& path) {
  static const std::map<std::string, PlyType> kTypes = {
      {"float", PlyType::Float32},   {"float32", PlyType::Float32},
      {"double", PlyType::Float64},  {"float64", PlyType::Float64},
      {"uchar", PlyType::Uint8},     {"uint8", PlyType::Uint8},
      {"char", PlyType::Int8},       {"int8", PlyType::Int8},
      {"ushort", PlyType::Uint16},   {"uint16", PlyType::Uint16},
      {"short", PlyType::Int16},     {"int16", PlyType::Int16},
      {"uint", PlyType::Uint32},     {"uint32", PlyType::Uint32},
      {"int", PlyType::Int32},       {"int32", PlyType::Int32},
  };
  auto it = kTypes.find(name);
  if (it == kTypes.end()) throw DataError("ply: " + path.string() + ": unsupported type " + name);
  return it->second;
}

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::Float32;
};

double decode(const unsigned char* bytes, PlyType t) {
  switch (t) {
    case PlyType::Float32: {
      float v;
      std::memcpy(&v, bytes, 4);
      return v;
    }
    case PlyType::Float64: {
      double v;
      std::memcpy(&v, bytes, 8);
      return v;
    }
    case PlyType::Uint8: return bytes[0];
    case PlyType::Int8: return static_cast<std::int8_t>(bytes[0]);
    case PlyType::Uint16: {
      std::uint16_t v;
      std::memcpy(&v, bytes, 2);
      return v;
    }
    case PlyType::Int16: {
      std::int16_t v;
      std::memcpy(&v, bytes, 2);
      return v;
    }
    case PlyType::Uint32: {
      std::uint32_t v;
      std::memcpy(&v, bytes, 4);
      return v;
    }
    case PlyType::Int32: {
      std::int32_t v;
      std::memcpy(&v, bytes, 4);
      return v;
    }
  }
  return 0.0;
}

double color_scale(PlyType t) { return t == PlyType::Uint8 ? 1.0 / 255.0 : 1.0; }

}  // namespace

PointCloud read_point_cloud_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("ply: cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line) || line != "ply") {
    throw DataError("ply: " + path.string() + ": missing magic");
  }

  bool binary = false;
  bool format_seen = false;
  std::size_t vertex_count = 0;
  std::vector<PlyProperty> properties;
  bool in_vertex_element = false;

  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "comment") continue;
    if (word == "format") {
      std::string kind;
      ls >> kind;
      if (kind == "ascii") {
        binary = false;
      } else if (kind == "binary_little_endian") {
        binary = true;
      } else {
        throw DataError("ply: " + path.string() + ": unsupported format " + kind);
      }
      format_seen = true;
    } else if (word == "element") {
      std::string name;
      std::size_t count = 0;
      ls >> name >> count;
      in_vertex_element = name == "vertex";
      if (in_vertex_element) vertex_count = count;
      if (!in_vertex_element && count > 0 && !properties.empty()) {
        break;  // only the vertex element is consumed
      }
    } else if (word == "property") {
      if (!in_vertex_element) continue;
      std::string type_name;
      ls >> type_name;
      if (type_name == "list") {
        throw DataError("ply: " + path.string() + ": list properties are unsupported");
      }
      PlyProperty p;
      p.type = parse_type(type_name, path);
      ls >> p.name;
      properties.push_back(p);
    } else if (word == "end_header") {
      break;
    }
  }
  if (!format_seen) throw DataError("ply: " + path.string() + ": missing format line");

  int ix = -1, iy = -1, iz = -1, ir = -1, ig = -1, ib = -1;
  for (int i = 0; i < static_cast<int>(properties.size()); ++i) {
    const auto& n = properties[i].name;
    if (n == "x") ix = i;
    if (n == "y") iy = i;
    if (n == "z") iz = i;
    if (n == "red" || n == "r") ir = i;
    if (n == "green" || n == "g") ig = i;
    if (n == "blue" || n == "b") ib = i;
  }
  if (ix < 0 || iy < 0 || iz < 0) {
    throw DataError("ply: " + path.string() + ": vertex element lacks x/y/z");
  }
  const bool has_color = ir >= 0 && ig >= 0 && ib >= 0;

  PointCloud cloud;
  cloud.points.reserve(vertex_count);
  if (has_color) cloud.colors.reserve(vertex_count);

  if (binary) {
    std::size_t stride = 0;
    std::vector<std::size_t> offsets(properties.size());
    for (std::size_t i = 0; i < properties.size(); ++i) {
      offsets[i] = stride;
      stride += type_size(properties[i].type);
    }
    std::vector<unsigned char> record(stride);
    for (std::size_t v = 0; v < vertex_count; ++v) {
      if (!in.read(reinterpret_cast<char*>(record.data()), static_cast<std::streamsize>(stride))) {
        throw DataError("ply: " + path.string() + ": truncated vertex data");
      }
      auto value = [&](int i) { return decode(record.data() + offsets[i], properties[i].type); };
      cloud.points.emplace_back(value(ix), value(iy), value(iz));
      if (has_color) {
        cloud.colors.emplace_back(
            static_cast<float>(value(ir) * color_scale(properties[ir].type)),
            static_cast<float>(value(ig) * color_scale(properties[ig].type)),
            static_cast<float>(value(ib) * color_scale(properties[ib].type)));
      }
    }
  } else {
    std::vector<double> record(properties.size());
    for (std::size_t v = 0; v < vertex_count; ++v) {
      for (std::size_t i = 0; i < properties.size(); ++i) {
        if (!(in >> record[i])) {
          throw DataError("ply: " + path.string() + ": truncated vertex data");
        }
      }
      cloud.points.emplace_back(record[ix], record[iy], record[iz]);
      if (has_color) {
        cloud.colors.emplace_back(
            static_cast<float>(record[ir] * color_scale(properties[ir].type)),
            static_cast<float>(record[ig] * color_scale(properties[ig].type)),
            static_cast<float>(record[ib] * color_scale(properties[ib].type)));
      }
    }
  }
  return cloud;
}

void write_point_cloud_ply(const std::filesystem::path& path, const PointCloud& cloud,
                           bool binary) {
  if (!cloud.colors.empty() && cloud.colors.size() != cloud.points.size()) {
    throw std::invalid_argument("ply: color count does not match point count");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("ply: cannot open " + path.string() + " for writing");

  const bool has_color = !cloud.colors.empty();
  out << "ply\nformat " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n";
  out << "element vertex " << cloud.points.size() << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  if (has_color) {
    out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  }
  out << "end_header\n";

  auto to_u8 = [](float v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
  };
  if (binary) {
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
      const float xyz[3] = {static_cast<float>(cloud.points[i].x()),
                            static_cast<float>(cloud.points[i].y()),
                            static_cast<float>(cloud.points[i].z())};
      out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
      if (has_color) {
        const std::uint8_t rgb[3] = {to_u8(cloud.colors[i].x()), to_u8(cloud.colors[i].y()),
                                     to_u8(cloud.colors[i].z())};
        out.write(reinterpret_cast<const char*>(rgb), sizeof(rgb));
      }
    }
  } else {
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
      out << static_cast<float>(cloud.points[i].x()) << " "
          << static_cast<float>(cloud.points[i].y()) << " "
          << static_cast<float>(cloud.points[i].z());
      if (has_color) {
        out << " " << static_cast<int>(to_u8(cloud.colors[i].x())) << " "
            << static_cast<int>(to_u8(cloud.colors[i].y())) << " "
            << static_cast<int>(to_u8(cloud.colors[i].z()));
      }
      out << "\n";
    }
  }
  if (!out) throw DataError("ply: failed to write " + path.string());
}

void write_splat_ply(const std::filesystem::path& path, const GaussianSet& gaussians) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("ply: cannot open " + path.string() + " for writing");

  out << "ply\nformat binary_little_endian 1.0\n";
  out << "element vertex " << gaussians.size() << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  out << "property float cov_xx\nproperty float cov_xy\nproperty float cov_xz\n";
  out << "property float cov_yy\nproperty float cov_yz\nproperty float cov_zz\n";
  out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out << "property float opacity\nproperty uint support\n";
  out << "end_header\n";

  auto to_u8 = [](double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
  };
  for (const auto& g : gaussians) {
    const float fields[9] = {static_cast<float>(g.mean.x()),
                             static_cast<float>(g.mean.y()),
                             static_cast<float>(g.mean.z()),
                             static_cast<float>(g.covariance(0, 0)),
                             static_cast<float>(g.covariance(0, 1)),
                             static_cast<float>(g.covariance(0, 2)),
                             static_cast<float>(g.covariance(1, 1)),
                             static_cast<float>(g.covariance(1, 2)),
                             static_cast<float>(g.covariance(2, 2))};
    out.write(reinterpret_cast<const char*>(fields), sizeof(fields));
    const std::uint8_t rgb[3] = {to_u8(g.color.x()), to_u8(g.color.y()), to_u8(g.color.z())};
    out.write(reinterpret_cast<const char*>(rgb), sizeof(rgb));
    const float opacity = static_cast<float>(g.opacity);
    out.write(reinterpret_cast<const char*>(&opacity), sizeof(opacity));
    const std::uint32_t support =
        static_cast<std::uint32_t>(std::min<std::uint64_t>(g.support, 0xffffffffULL));
    out.write(reinterpret_cast<const char*>(&support), sizeof(support));
  }
  if (!out) throw DataError("ply: failed to write " + path.string());
}

}  // namespace gsmap
