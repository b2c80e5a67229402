#include "gsmap/archive.hpp"

#include "gsmap/errors.hpp"

#include <zlib.h>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

namespace gsmap {

namespace {

constexpr char kMagic[8] = {'G', 'S', 'M', 'A', 'P', 'A', 'R', 'C'};
constexpr std::uint32_t kFormatVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "archive encoding assumes a little-endian host");

class Encoder {
 public:
  void u8(std::uint8_t v) { buffer_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void i64(std::int64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void str(const std::string& s) {
    u64(s.size());
    raw(s.data(), s.size());
  }

  const std::vector<char>& bytes() const { return buffer_; }

 private:
  void raw(const void* data, std::size_t size) {
    const char* p = static_cast<const char*>(data);
    buffer_.insert(buffer_.end(), p, p + size);
  }

  std::vector<char> buffer_;
};

class Decoder {
 public:
  explicit Decoder(std::vector<char> bytes) : buffer_(std::move(bytes)) {}

  std::uint8_t u8() {
    std::uint8_t v;
    raw(&v, sizeof v);
    return v;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    raw(&v, sizeof v);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    raw(&v, sizeof v);
    return v;
  }
  std::int64_t i64() {
    std::int64_t v;
    raw(&v, sizeof v);
    return v;
  }
  double f64() {
    double v;
    raw(&v, sizeof v);
    return v;
  }
  std::string str() {
    const std::uint64_t size = u64();
    if (size > remaining()) throw DataError("archive: truncated string");
    std::string s(buffer_.data() + offset_, size);
    offset_ += size;
    return s;
  }
  std::size_t remaining() const { return buffer_.size() - offset_; }

 private:
  void raw(void* out, std::size_t size) {
    if (size > remaining()) throw DataError("archive: truncated payload");
    std::memcpy(out, buffer_.data() + offset_, size);
    offset_ += size;
  }

  std::vector<char> buffer_;
  std::size_t offset_ = 0;
};

void encode_config(Encoder& enc, const MapConfig& config) {
  enc.f64(config.estimator.voxel_size);
  enc.f64(config.estimator.epsilon);
  enc.f64(config.estimator.lambda_sigma);
  enc.f64(config.estimator.lambda_color);
  enc.f64(config.estimator.tau);
  enc.f64(config.estimator.base_threshold);
  enc.f64(config.estimator.opacity);
  enc.u32(config.estimator.merge_mode == MergeMode::Verbatim ? 0 : 1);
  enc.u32(static_cast<std::uint32_t>(config.estimator.max_merge_passes));
  enc.f64(config.tau_s);
  enc.u64(config.buffer_limit);
  enc.f64(config.cell_size);
  enc.f64(config.footprint_sigma);
  enc.f64(config.floor_band);
  enc.f64(config.agent_height);
  enc.f64(config.ground_bin);
}

MapConfig decode_config(Decoder& dec) {
  MapConfig config;
  config.estimator.voxel_size = dec.f64();
  config.estimator.epsilon = dec.f64();
  config.estimator.lambda_sigma = dec.f64();
  config.estimator.lambda_color = dec.f64();
  config.estimator.tau = dec.f64();
  config.estimator.base_threshold = dec.f64();
  config.estimator.opacity = dec.f64();
  config.estimator.merge_mode = dec.u32() == 0 ? MergeMode::Verbatim : MergeMode::Flatness;
  config.estimator.max_merge_passes = static_cast<int>(dec.u32());
  config.tau_s = dec.f64();
  config.buffer_limit = dec.u64();
  config.cell_size = dec.f64();
  config.footprint_sigma = dec.f64();
  config.floor_band = dec.f64();
  config.agent_height = dec.f64();
  config.ground_bin = dec.f64();
  return config;
}

void encode_gaussian(Encoder& enc, const Gaussian3D& g) {
  for (int i = 0; i < 3; ++i) enc.f64(g.mean(i));
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) enc.f64(g.covariance(r, c));
  }
  for (int i = 0; i < 3; ++i) enc.f64(g.color(i));
  enc.f64(g.opacity);
  enc.u64(g.support);
}

Gaussian3D decode_gaussian(Decoder& dec) {
  Gaussian3D g;
  for (int i = 0; i < 3; ++i) g.mean(i) = dec.f64();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) g.covariance(r, c) = dec.f64();
  }
  for (int i = 0; i < 3; ++i) g.color(i) = dec.f64();
  g.opacity = dec.f64();
  g.support = dec.u64();
  return g;
}

void encode_embedding(Encoder& enc, const Embedding& e) {
  enc.u64(e.values.size());
  for (double v : e.values) enc.f64(v);
}

Embedding decode_embedding(Decoder& dec) {
  Embedding e;
  const std::uint64_t n = dec.u64();
  e.values.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) e.values.push_back(dec.f64());
  return e;
}

std::uint32_t payload_crc(const std::vector<char>& payload) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(payload.data()),
            static_cast<uInt>(payload.size())));
}

}  // namespace

void save_map(const std::filesystem::path& path, const SemanticMap& map, const MapConfig& config) {
  Encoder enc;
  encode_config(enc, config);
  enc.u32(map.next_instance_id());
  enc.u32(map.next_region_id());

  enc.u64(map.instances().size());
  for (const auto& [id, unit] : map.instances()) {
    enc.u32(id);
    enc.str(unit.text);
    encode_embedding(enc, unit.embedding);
    enc.u64(unit.gaussians.size());
    for (const auto& g : unit.gaussians) encode_gaussian(enc, g);
  }

  enc.u64(map.regions().size());
  for (const auto& [id, unit] : map.regions()) {
    enc.u32(id);
    enc.str(unit.text);
    encode_embedding(enc, unit.embedding);
    enc.u64(unit.members.size());
    for (InstanceId m : unit.members) enc.u32(m);
  }

  enc.f64(map.grid().cell_size);
  enc.u64(map.grid().cells.size());
  for (const auto& [coord, cell] : map.grid().cells) {
    enc.i64(coord.x);
    enc.i64(coord.y);
    enc.u8(static_cast<std::uint8_t>(cell.state));
    enc.u64(cell.instances.size());
    for (InstanceId id : cell.instances) enc.u32(id);
    enc.u64(cell.regions.size());
    for (RegionId id : cell.regions) enc.u32(id);
  }

  const auto& payload = enc.bytes();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("archive: cannot open " + path.string() + " for writing");
  out.write(kMagic, sizeof(kMagic));
  const std::uint32_t version = kFormatVersion;
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  const std::uint64_t size = payload.size();
  out.write(reinterpret_cast<const char*>(&size), sizeof(size));
  const std::uint32_t crc = payload_crc(payload);
  out.write(reinterpret_cast<const char*>(&crc), sizeof(crc));
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw DataError("archive: failed to write " + path.string());
}

LoadedMap load_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("archive: cannot open " + path.string());

  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError("archive: " + path.string() + " is not a map archive");
  }
  std::uint32_t version = 0;
  std::uint64_t size = 0;
  std::uint32_t crc = 0;
  if (!in.read(reinterpret_cast<char*>(&version), sizeof(version)) ||
      !in.read(reinterpret_cast<char*>(&size), sizeof(size)) ||
      !in.read(reinterpret_cast<char*>(&crc), sizeof(crc))) {
    throw DataError("archive: " + path.string() + ": truncated header");
  }
  if (version != kFormatVersion) {
    throw DataError("archive: " + path.string() + ": unsupported format version " +
                    std::to_string(version));
  }

  std::vector<char> payload(size);
  if (!in.read(payload.data(), static_cast<std::streamsize>(size))) {
    throw DataError("archive: " + path.string() + ": truncated payload");
  }
  if (payload_crc(payload) != crc) {
    throw DataError("archive: " + path.string() + ": checksum mismatch");
  }
  if (in.peek() != std::ifstream::traits_type::eof()) {
    throw DataError("archive: " + path.string() + ": trailing bytes");
  }

  Decoder dec(std::move(payload));
  LoadedMap loaded;
  loaded.config = decode_config(dec);
  const InstanceId next_instance = dec.u32();
  const RegionId next_region = dec.u32();

  std::map<InstanceId, InstanceUnit> instances;
  const std::uint64_t n_instances = dec.u64();
  for (std::uint64_t i = 0; i < n_instances; ++i) {
    InstanceUnit unit;
    unit.id = dec.u32();
    unit.text = dec.str();
    unit.embedding = decode_embedding(dec);
    const std::uint64_t n_gaussians = dec.u64();
    unit.gaussians.reserve(n_gaussians);
    for (std::uint64_t k = 0; k < n_gaussians; ++k) unit.gaussians.push_back(decode_gaussian(dec));
    const InstanceId id = unit.id;
    if (!instances.emplace(id, std::move(unit)).second) {
      throw DataError("archive: duplicate instance id " + std::to_string(id));
    }
  }

  std::map<RegionId, RegionUnit> regions;
  const std::uint64_t n_regions = dec.u64();
  for (std::uint64_t i = 0; i < n_regions; ++i) {
    RegionUnit unit;
    unit.id = dec.u32();
    unit.text = dec.str();
    unit.embedding = decode_embedding(dec);
    const std::uint64_t n_members = dec.u64();
    for (std::uint64_t k = 0; k < n_members; ++k) unit.members.insert(dec.u32());
    const RegionId id = unit.id;
    if (!regions.emplace(id, std::move(unit)).second) {
      throw DataError("archive: duplicate region id " + std::to_string(id));
    }
  }

  IndexGrid grid;
  grid.cell_size = dec.f64();
  const std::uint64_t n_cells = dec.u64();
  for (std::uint64_t i = 0; i < n_cells; ++i) {
    CellCoord coord;
    coord.x = dec.i64();
    coord.y = dec.i64();
    GridCell cell;
    const std::uint8_t state = dec.u8();
    if (state > 2) throw DataError("archive: invalid cell state");
    cell.state = static_cast<CellState>(state);
    const std::uint64_t n_inst = dec.u64();
    for (std::uint64_t k = 0; k < n_inst; ++k) cell.instances.insert(dec.u32());
    const std::uint64_t n_reg = dec.u64();
    for (std::uint64_t k = 0; k < n_reg; ++k) cell.regions.insert(dec.u32());
    grid.cells.emplace(coord, std::move(cell));
  }
  if (dec.remaining() != 0) {
    throw DataError("archive: " + path.string() + ": trailing bytes");
  }

  loaded.map.restore(std::move(instances), std::move(regions), std::move(grid), next_instance,
                     next_region);
  return loaded;
}

}  // namespace gsmap
