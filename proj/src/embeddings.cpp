#include "hyperhier/embeddings.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "hyperhier/errors.hpp"

namespace hyperhier {

const char* geometry_name(Geometry g) {
  return g == Geometry::hyperbolic ? "hyperbolic" : "euclidean";
}

Geometry parse_geometry(std::string_view name) {
  if (name == "euclidean") return Geometry::euclidean;
  if (name == "hyperbolic") return Geometry::hyperbolic;
  throw std::invalid_argument("unknown geometry: " + std::string(name));
}

void LabeledEmbeddings::validate() const {
  if (dim == 0) throw std::invalid_argument("embeddings: zero dimension");
  if (coords.size() != labels.size() * dim)
    throw std::invalid_argument("embeddings: coordinate/label size mismatch");
}

LabeledEmbeddings map_to_ball(const LabeledEmbeddings& raw, const BallConfig& cfg) {
  raw.validate();
  if (raw.geometry != Geometry::euclidean)
    throw std::invalid_argument("map_to_ball: input already hyperbolic");
  LabeledEmbeddings out;
  out.geometry = Geometry::hyperbolic;
  out.dim = raw.dim;
  out.labels = raw.labels;
  out.coords.resize(raw.coords.size());
  const std::size_t count = raw.count();
#pragma omp parallel for schedule(static)
  for (long i = 0; i < static_cast<long>(count); ++i) {
    const auto row = raw.sample(i);
    const BallPoint p = exp_map_origin(Tangent{Vec(row.begin(), row.end())}, cfg);
    std::copy(p.coords.begin(), p.coords.end(), out.coords.begin() + i * raw.dim);
  }
  return out;
}

namespace {

constexpr char kMagic[4] = {'H', 'H', 'E', 'B'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& os, double v) {
  const std::uint64_t u = std::bit_cast<std::uint64_t>(v);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw FormatError("sample file: truncated");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

double get_f64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw FormatError("sample file: truncated");
  std::uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(u);
}

}  // namespace

void write_embeddings(const std::filesystem::path& path, const LabeledEmbeddings& data) {
  data.validate();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  os.write(kMagic, 4);
  put_u32(os, kVersion);
  put_u32(os, static_cast<std::uint32_t>(data.dim));
  put_u32(os, static_cast<std::uint32_t>(data.count()));
  for (std::size_t i = 0; i < data.count(); ++i) {
    for (double v : data.sample(i)) put_f64(os, v);
    put_u32(os, data.labels[i]);
  }
  if (!os) throw IoError("write failed: " + path.string());
}

LabeledEmbeddings read_embeddings(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw FileMissingError("no such file: " + path.string());
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path.string());
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw FormatError("sample file: bad magic: " + path.string());
  const std::uint32_t version = get_u32(is);
  if (version != kVersion) throw FormatError("sample file: unsupported version");
  const std::uint32_t dim = get_u32(is);
  const std::uint32_t count = get_u32(is);
  if (dim == 0) throw FormatError("sample file: zero dimension");
  LabeledEmbeddings data;
  data.geometry = Geometry::euclidean;
  data.dim = dim;
  data.coords.reserve(static_cast<std::size_t>(dim) * count);
  data.labels.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    for (std::uint32_t j = 0; j < dim; ++j) data.coords.push_back(get_f64(is));
    data.labels.push_back(get_u32(is));
  }
  char extra;
  if (is.read(&extra, 1)) throw FormatError("sample file: trailing bytes");
  return data;
}

}  // namespace hyperhier
