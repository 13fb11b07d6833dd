#include "hyperhier/taxonomy.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "hyperhier/errors.hpp"
#include "hyperhier/rng.hpp"

namespace hyperhier {

std::optional<std::string> validate_tree(const LabelTree& tree) {
  if (tree.levels.empty()) return "tree has no levels";
  for (std::size_t l = 0; l < tree.levels.size(); ++l) {
    if (tree.levels[l].empty()) return "level " + std::to_string(l) + " has no nodes";
    std::set<std::string> seen;
    for (const std::string& name : tree.levels[l]) {
      if (name.empty()) return "level " + std::to_string(l) + " has an empty name";
      if (!seen.insert(name).second)
        return "level " + std::to_string(l) + " repeats name '" + name + "'";
    }
  }
  if (tree.parent_of.size() != tree.levels.size() - 1)
    return "expected " + std::to_string(tree.levels.size() - 1) + " parent tables, found " +
           std::to_string(tree.parent_of.size());
  for (std::size_t l = 0; l + 1 < tree.levels.size(); ++l) {
    const auto& table = tree.parent_of[l];
    if (table.size() != tree.levels[l].size())
      return "parent table " + std::to_string(l) + " covers " + std::to_string(table.size()) +
             " nodes, level has " + std::to_string(tree.levels[l].size());
    if (tree.levels[l + 1].size() > tree.levels[l].size())
      return "level " + std::to_string(l + 1) + " is larger than level " + std::to_string(l);
    std::vector<bool> used(tree.levels[l + 1].size(), false);
    for (std::size_t j = 0; j < table.size(); ++j) {
      if (table[j] >= tree.levels[l + 1].size())
        return "node " + std::to_string(j) + " of level " + std::to_string(l) +
               " points at missing parent " + std::to_string(table[j]);
      used[table[j]] = true;
    }
    for (std::size_t p = 0; p < used.size(); ++p)
      if (!used[p])
        return "parent '" + tree.levels[l + 1][p] + "' of level " + std::to_string(l + 1) +
               " has no children";
  }
  return std::nullopt;
}

std::vector<double> parent_posterior(std::span<const double> probs, const LabelTree& tree,
                                     std::size_t from_level) {
  if (from_level + 1 >= tree.depth())
    throw std::out_of_range("parent_posterior: no level above " + std::to_string(from_level));
  const auto& table = tree.parent_of[from_level];
  if (probs.size() != table.size())
    throw std::invalid_argument("parent_posterior: distribution size does not match level");
  std::vector<double> out(tree.levels[from_level + 1].size(), 0.0);
  for (std::size_t j = 0; j < table.size(); ++j) out[table[j]] += probs[j];
  return out;
}

std::size_t ancestor_label(std::size_t leaf, std::size_t level, const LabelTree& tree) {
  if (level >= tree.depth()) throw std::out_of_range("ancestor_label: level out of range");
  if (leaf >= tree.levels[0].size()) throw std::out_of_range("ancestor_label: leaf out of range");
  std::size_t node = leaf;
  for (std::size_t l = 0; l < level; ++l) node = tree.parent_of[l][node];
  return node;
}

LabelTree shuffle_hierarchy(const LabelTree& tree, std::uint64_t seed) {
  if (tree.depth() < 2) throw std::invalid_argument("shuffle_hierarchy: tree has no parent level");
  LabelTree out = tree;
  CounterRng rng = CounterRng::keyed(seed, streams::tree_shuffle);
  const std::size_t k = tree.levels[0].size();
  std::vector<std::size_t> perm = random_permutation(k, rng);
  for (std::size_t i = 0; i < k; ++i) out.parent_of[0][i] = tree.parent_of[0][perm[i]];
  return out;
}

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> tokens;
  std::string t;
  while (ss >> t) tokens.push_back(t);
  return tokens;
}

}  // namespace

LabelTree parse_tree(std::istream& is) {
  LabelTree tree;
  std::string line;
  std::size_t lineno = 0;
  long declared = -1;
  auto fail = [&](const std::string& what) {
    throw FormatError("tree line " + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::vector<std::string> tokens = tokenize(line);
    if (tokens.empty()) continue;
    if (tokens[0] == "levels:") {
      if (declared >= 0) fail("duplicate levels directive");
      if (tokens.size() != 2) fail("expected 'levels: <count>'");
      declared = std::stol(tokens[1]);
      if (declared < 1) fail("level count must be positive");
      tree.levels.resize(static_cast<std::size_t>(declared));
      tree.parent_of.resize(static_cast<std::size_t>(declared) - 1);
    } else if (tokens[0] == "level") {
      if (declared < 0) fail("level before levels directive");
      if (tokens.size() < 3 || tokens[1].back() != ':') fail("expected 'level <i>: <names>'");
      const std::size_t idx = std::stoul(tokens[1].substr(0, tokens[1].size() - 1));
      if (idx >= tree.levels.size()) fail("level index out of range");
      if (!tree.levels[idx].empty()) fail("duplicate level " + std::to_string(idx));
      tree.levels[idx].assign(tokens.begin() + 2, tokens.end());
    } else if (tokens[0] == "parents") {
      if (declared < 0) fail("parents before levels directive");
      if (tokens.size() < 3 || tokens[1].back() != ':') fail("expected 'parents <i>: <indices>'");
      const std::size_t idx = std::stoul(tokens[1].substr(0, tokens[1].size() - 1));
      if (idx >= tree.parent_of.size()) fail("parents index out of range");
      if (!tree.parent_of[idx].empty()) fail("duplicate parents " + std::to_string(idx));
      for (auto it = tokens.begin() + 2; it != tokens.end(); ++it) {
        try {
          tree.parent_of[idx].push_back(std::stoul(*it));
        } catch (const std::exception&) {
          fail("bad parent index '" + *it + "'");
        }
      }
    } else {
      fail("unknown directive '" + tokens[0] + "'");
    }
  }
  if (declared < 0) throw FormatError("tree: missing levels directive");
  if (const auto violation = validate_tree(tree)) throw FormatError("tree: " + *violation);
  return tree;
}

std::string format_tree(const LabelTree& tree) {
  std::ostringstream os;
  os << "levels: " << tree.depth() << "\n";
  for (std::size_t l = 0; l < tree.depth(); ++l) {
    os << "level " << l << ":";
    for (const std::string& name : tree.levels[l]) os << " " << name;
    os << "\n";
  }
  for (std::size_t l = 0; l < tree.parent_of.size(); ++l) {
    os << "parents " << l << ":";
    for (std::size_t p : tree.parent_of[l]) os << " " << p;
    os << "\n";
  }
  return os.str();
}

LabelTree load_tree(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw FileMissingError("no such file: " + path.string());
  std::ifstream is(path);
  if (!is) throw IoError("cannot open: " + path.string());
  return parse_tree(is);
}

void save_tree(const std::filesystem::path& path, const LabelTree& tree) {
  if (const auto violation = validate_tree(tree))
    throw std::invalid_argument("save_tree: " + *violation);
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  os << format_tree(tree);
  if (!os) throw IoError("write failed: " + path.string());
}

LabelTree default_taxonomy() {
  LabelTree tree;
  tree.levels = {
      {"road",    "sidewalk", "building",      "wall",   "fence",  "pole",  "traffic_light",
       "traffic_sign", "vegetation", "terrain", "sky",   "person", "rider", "car",
       "truck",   "bus",      "train",         "motorcycle", "bicycle"},
      {"flat", "construction", "object", "nature", "sky", "human", "vehicle"},
  };
  tree.parent_of = {{0, 0, 1, 1, 1, 2, 2, 2, 3, 3, 4, 5, 5, 6, 6, 6, 6, 6, 6}};
  return tree;
}

LabelTree toy_taxonomy(std::size_t classes) {
  if (classes < 2) throw std::invalid_argument("toy_taxonomy: need at least two classes");
  LabelTree tree;
  tree.levels.resize(2);
  tree.parent_of.resize(1);
  for (std::size_t i = 0; i < classes; ++i) {
    tree.levels[0].push_back("class_" + std::to_string(i));
    tree.parent_of[0].push_back(i / 2);
  }
  for (std::size_t j = 0; j < (classes + 1) / 2; ++j)
    tree.levels[1].push_back("group_" + std::to_string(j));
  return tree;
}

}  // namespace hyperhier
