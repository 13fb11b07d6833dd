#pragma once

#include <cstdint>
#include <vector>

#include "hyperhier/embeddings.hpp"
#include "hyperhier/taxonomy.hpp"
#include "hyperhier/vec.hpp"

namespace hyperhier {

// Class-balanced Gaussian clusters whose means sit on a sphere of radius
// `radius`: equally spaced angles (plus a seeded angular jitter) in two
// dimensions, seeded farthest-point directions above that. Adjacent-class
// margins are therefore controlled by radius/sigma, and grouping non-adjacent
// classes under one parent produces deliberately uneven margins.
struct SyntheticConfig {
  std::size_t dim = 2;
  std::size_t classes = 8;
  double radius = 4.0;
  double sigma = 0.5;
  double mean_jitter = 0.05;  // radians of angular noise on each mean
  std::size_t train_per_class = 500;
  std::size_t test_per_class = 500;
  std::uint64_t seed = 0;
  LabelTree tree;  // empty: pair adjacent classes via toy_taxonomy(classes)

  void validate() const;  // throws std::invalid_argument
};

struct SyntheticData {
  LabeledEmbeddings train;
  LabeledEmbeddings test;
  LabelTree tree;
  std::vector<Vec> means;  // per class, for nearest-mean oracles
};

// Deterministic in cfg.seed: means, train draws and test draws each consume
// their own counter-based stream, so the splits are independent but
// reproducible. Both splits are tagged euclidean; ball training lifts them
// through the origin map later.
SyntheticData generate_synthetic(const SyntheticConfig& cfg);

}  // namespace hyperhier
