#include "hyperhier/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "hyperhier/rng.hpp"

namespace hyperhier {

void SyntheticConfig::validate() const {
  if (dim < 2) throw std::invalid_argument("synthetic: dimension must be at least 2");
  if (classes < 2) throw std::invalid_argument("synthetic: need at least 2 classes");
  if (!(radius > 0.0)) throw std::invalid_argument("synthetic: radius must be positive");
  if (!(sigma > 0.0)) throw std::invalid_argument("synthetic: sigma must be positive");
  if (!(mean_jitter >= 0.0)) throw std::invalid_argument("synthetic: jitter must be nonnegative");
  if (train_per_class == 0 || test_per_class == 0)
    throw std::invalid_argument("synthetic: samples per class must be positive");
  if (tree.depth() > 0) {
    if (const auto violation = validate_tree(tree))
      throw std::invalid_argument("synthetic: bad tree: " + *violation);
    if (tree.levels[0].size() != classes)
      throw std::invalid_argument("synthetic: tree leaf count does not match class count");
  }
}

namespace {

Vec unit_gaussian_direction(std::size_t dim, CounterRng& rng) {
  Vec v(dim);
  double n2 = 0.0;
  do {
    for (double& x : v) x = rng.normal();
    n2 = squared_norm(v);
  } while (n2 < 1e-12);
  const double inv = 1.0 / std::sqrt(n2);
  for (double& x : v) x *= inv;
  return v;
}

// Cluster directions: exact angular spacing with jitter in the plane; above
// two dimensions, greedy farthest-point selection over seeded candidates so
// the smallest pairwise angle stays controlled.
std::vector<Vec> make_means(const SyntheticConfig& cfg) {
  CounterRng rng = CounterRng::keyed(cfg.seed, streams::synthetic_means);
  std::vector<Vec> means(cfg.classes);
  if (cfg.dim == 2) {
    for (std::size_t k = 0; k < cfg.classes; ++k) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) /
                               static_cast<double>(cfg.classes) +
                           cfg.mean_jitter * rng.normal();
      means[k] = {cfg.radius * std::cos(angle), cfg.radius * std::sin(angle)};
    }
    return means;
  }
  constexpr int kCandidates = 64;
  std::vector<Vec> dirs;
  dirs.push_back(unit_gaussian_direction(cfg.dim, rng));
  while (dirs.size() < cfg.classes) {
    Vec best;
    double best_sep = -2.0;
    for (int t = 0; t < kCandidates; ++t) {
      Vec cand = unit_gaussian_direction(cfg.dim, rng);
      double worst = 2.0;  // min squared chordal distance to the chosen set
      for (const Vec& d : dirs) worst = std::min(worst, squared_distance(cand, d));
      if (worst > best_sep) {
        best_sep = worst;
        best = std::move(cand);
      }
    }
    dirs.push_back(std::move(best));
  }
  for (std::size_t k = 0; k < cfg.classes; ++k) means[k] = scaled(dirs[k], cfg.radius);
  return means;
}

LabeledEmbeddings draw_split(const SyntheticConfig& cfg, const std::vector<Vec>& means,
                             std::size_t per_class, std::uint64_t stream) {
  CounterRng rng = CounterRng::keyed(cfg.seed, stream);
  LabeledEmbeddings split;
  split.geometry = Geometry::euclidean;
  split.dim = cfg.dim;
  split.coords.reserve(cfg.classes * per_class * cfg.dim);
  split.labels.reserve(cfg.classes * per_class);
  for (std::size_t k = 0; k < cfg.classes; ++k)
    for (std::size_t s = 0; s < per_class; ++s) {
      for (std::size_t d = 0; d < cfg.dim; ++d)
        split.coords.push_back(means[k][d] + cfg.sigma * rng.normal());
      split.labels.push_back(static_cast<std::uint32_t>(k));
    }
  return split;
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticConfig& cfg) {
  cfg.validate();
  SyntheticData data;
  data.tree = cfg.tree.depth() > 0 ? cfg.tree : toy_taxonomy(cfg.classes);
  data.means = make_means(cfg);
  data.train = draw_split(cfg, data.means, cfg.train_per_class, streams::synthetic_train);
  data.test = draw_split(cfg, data.means, cfg.test_per_class, streams::synthetic_test);
  return data;
}

}  // namespace hyperhier
