#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hyperhier {

// Stationary label hierarchy. Level 0 holds the leaf classes a model predicts
// over; parent_of[i][j] is the index at level i+1 that node j of level i
// attaches to. The tree never feeds back into training — coarse predictions
// are derived from leaf posteriors after the fact.
struct LabelTree {
  std::vector<std::vector<std::string>> levels;
  std::vector<std::vector<std::size_t>> parent_of;

  std::size_t depth() const { return levels.size(); }
  std::size_t size(std::size_t level) const { return levels.at(level).size(); }
};

// First structural violation found, or nullopt for a well-formed tree.
// Checks: per-level name uniqueness, parent table shape, parent indices in
// range, no childless parents, level sizes non-increasing toward the root.
std::optional<std::string> validate_tree(const LabelTree& tree);

// Sum a level's class distribution into its parent level. Probability mass
// is moved, never created: each parent receives exactly the sum of its
// children, in child-index order.
std::vector<double> parent_posterior(std::span<const double> probs, const LabelTree& tree,
                                     std::size_t from_level = 0);

// Index of the ancestor of `leaf` at `level` (level 0 returns leaf itself).
std::size_t ancestor_label(std::size_t leaf, std::size_t level, const LabelTree& tree);

// Permute which leaves attach to which parent while keeping every parent's
// child count (and all names) fixed. Never returns the identity assignment.
LabelTree shuffle_hierarchy(const LabelTree& tree, std::uint64_t seed);

// Text format, one directive per line ("#" comments and blank lines allowed):
//   levels: <count>
//   level <i>: <name> <name> ...
//   parents <i>: <parent index per node of level i>
LabelTree parse_tree(std::istream& is);
std::string format_tree(const LabelTree& tree);
LabelTree load_tree(const std::filesystem::path& path);
void save_tree(const std::filesystem::path& path, const LabelTree& tree);

// 19 urban scene classes under 7 coarse groups.
LabelTree default_taxonomy();

// classes leaves named class_<i>, grouped pairwise into ceil(classes/2)
// parents named group_<j>; leaf i attaches to group i/2.
LabelTree toy_taxonomy(std::size_t classes);

}  // namespace hyperhier
