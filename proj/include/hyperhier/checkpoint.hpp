#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "hyperhier/mlr.hpp"

namespace hyperhier {

// Checkpoint text: one header line
//   header = <geometry> <classes> <dim> <curvature> <boundary_eps>
// then one "name = space-separated floats" line per parameter tensor, in
// class order: gyroplane.K.offset / gyroplane.K.normal for ball models,
// class.K.weight / class.K.bias for euclidean ones. Floats are printed with
// 17 significant digits, so save/load round-trips every bit.
std::string format_model(const FlatModel& model);
FlatModel parse_model(std::istream& is);  // throws FormatError with line numbers

void save_model(const std::filesystem::path& path, const FlatModel& model);
FlatModel load_model(const std::filesystem::path& path);

}  // namespace hyperhier
