#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "hyperhier/geometry.hpp"

namespace hyperhier {

enum class Geometry { euclidean, hyperbolic };

const char* geometry_name(Geometry g);
Geometry parse_geometry(std::string_view name);  // throws std::invalid_argument

// Label value that marks a sample as excluded from evaluation.
inline constexpr std::uint32_t kIgnoreLabel = 0xffffffffu;

// Row-major sample store. `geometry` records which space the rows live in:
// euclidean rows are unconstrained feature vectors, hyperbolic rows lie
// inside the ball.
struct LabeledEmbeddings {
  Geometry geometry = Geometry::euclidean;
  std::size_t dim = 0;
  std::vector<double> coords;
  std::vector<std::uint32_t> labels;

  std::size_t count() const { return labels.size(); }
  std::span<const double> sample(std::size_t i) const {
    return std::span<const double>(coords).subspan(i * dim, dim);
  }
  void validate() const;  // throws std::invalid_argument on inconsistent sizes
};

// Push raw feature rows onto the ball through the origin exponential map.
LabeledEmbeddings map_to_ball(const LabeledEmbeddings& raw, const BallConfig& cfg);

// Sample files: magic "HHEB", then little-endian u32 version (= 1), u32
// dimension, u32 count, followed by count records of dimension f64
// coordinates and one u32 label each.
void write_embeddings(const std::filesystem::path& path, const LabeledEmbeddings& data);
LabeledEmbeddings read_embeddings(const std::filesystem::path& path);

}  // namespace hyperhier
