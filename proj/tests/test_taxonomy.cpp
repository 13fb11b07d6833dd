#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "hyperhier/errors.hpp"
#include "hyperhier/rng.hpp"
#include "hyperhier/taxonomy.hpp"

using namespace hyperhier;

TEST_SUITE("taxonomy") {

TEST_CASE("shipped taxonomy is well-formed") {
  const LabelTree tree = default_taxonomy();
  CHECK(tree.depth() == 2);
  CHECK(tree.size(0) == 19);
  CHECK(tree.size(1) == 7);
  CHECK(!validate_tree(tree).has_value());
  CHECK(tree.levels[0][0] == "road");
  CHECK(tree.levels[0][10] == "sky");
  CHECK(tree.levels[1][6] == "vehicle");

  // spot-check the ancestry
  CHECK(ancestor_label(0, 1, tree) == 0);   // road -> flat
  CHECK(ancestor_label(4, 1, tree) == 1);   // fence -> construction
  CHECK(ancestor_label(10, 1, tree) == 4);  // sky -> sky
  CHECK(ancestor_label(18, 1, tree) == 6);  // bicycle -> vehicle
  CHECK(ancestor_label(12, 0, tree) == 12);
  CHECK_THROWS_AS(ancestor_label(0, 2, tree), std::out_of_range);
  CHECK_THROWS_AS(ancestor_label(19, 1, tree), std::out_of_range);
}

TEST_CASE("toy taxonomy groups leaves pairwise") {
  const LabelTree tree = toy_taxonomy(8);
  CHECK(tree.size(0) == 8);
  CHECK(tree.size(1) == 4);
  CHECK(!validate_tree(tree).has_value());
  for (std::size_t i = 0; i < 8; ++i) CHECK(tree.parent_of[0][i] == i / 2);

  const LabelTree odd = toy_taxonomy(7);
  CHECK(odd.size(1) == 4);
  CHECK(!validate_tree(odd).has_value());
  CHECK_THROWS_AS(toy_taxonomy(1), std::invalid_argument);
}

TEST_CASE("validation reports each structural violation") {
  CHECK(validate_tree(LabelTree{}).has_value());

  LabelTree dup = toy_taxonomy(4);
  dup.levels[0][1] = "class_0";
  CHECK(validate_tree(dup).has_value());

  LabelTree shape = toy_taxonomy(4);
  shape.parent_of[0].pop_back();
  CHECK(validate_tree(shape).has_value());

  LabelTree range = toy_taxonomy(4);
  range.parent_of[0][0] = 9;
  CHECK(validate_tree(range).has_value());

  LabelTree childless = toy_taxonomy(4);
  childless.parent_of[0] = {0, 0, 0, 0};
  const auto v = validate_tree(childless);
  REQUIRE(v.has_value());
  CHECK(v->find("group_1") != std::string::npos);

  LabelTree growing;
  growing.levels = {{"a", "b"}, {"p", "q", "r"}};
  growing.parent_of = {{0, 1}};
  CHECK(validate_tree(growing).has_value());

  // equal level sizes are allowed: an identity hierarchy is legitimate
  LabelTree identity;
  identity.levels = {{"a", "b", "c"}, {"pa", "pb", "pc"}};
  identity.parent_of = {{0, 1, 2}};
  CHECK(!validate_tree(identity).has_value());
}

TEST_CASE("parent posteriors move mass exactly") {
  const LabelTree tree = default_taxonomy();
  CounterRng rng = CounterRng::keyed(43, 300);

  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> p(19);
    double sum = 0.0;
    for (double& v : p) {
      v = -std::log(rng.uniform_pos());
      sum += v;
    }
    for (double& v : p) v /= sum;

    const std::vector<double> parents = parent_posterior(p, tree);
    REQUIRE(parents.size() == 7);

    // each parent holds exactly the sum of its children, bitwise
    for (std::size_t j = 0; j < 7; ++j) {
      double want = 0.0;
      for (std::size_t i = 0; i < 19; ++i)
        if (tree.parent_of[0][i] == j) want += p[i];
      CHECK(parents[j] == want);
    }

    // normalization is preserved
    double total = 0.0;
    for (double v : parents) total += v;
    CHECK(std::fabs(total - 1.0) < 1e-12);
  }

  // identity hierarchy: the distribution passes through unchanged
  LabelTree identity;
  identity.levels = {{"a", "b", "c"}, {"pa", "pb", "pc"}};
  identity.parent_of = {{0, 1, 2}};
  const std::vector<double> p{0.2, 0.3, 0.5};
  CHECK(parent_posterior(p, identity) == p);

  CHECK_THROWS_AS(parent_posterior(std::vector<double>(5, 0.2), tree), std::invalid_argument);
  CHECK_THROWS_AS(parent_posterior(p, identity, 1), std::out_of_range);
}

TEST_CASE("hierarchy shuffling keeps family sizes and names") {
  const LabelTree tree = default_taxonomy();
  const LabelTree shuffled = shuffle_hierarchy(tree, 5);

  CHECK(shuffled.levels == tree.levels);
  CHECK(shuffled.parent_of[0] != tree.parent_of[0]);
  CHECK(!validate_tree(shuffled).has_value());

  std::map<std::size_t, int> before, after;
  for (std::size_t p : tree.parent_of[0]) before[p]++;
  for (std::size_t p : shuffled.parent_of[0]) after[p]++;
  CHECK(before == after);

  // deterministic in the seed
  CHECK(shuffle_hierarchy(tree, 5).parent_of == shuffled.parent_of);

  CHECK_THROWS_AS(shuffle_hierarchy(LabelTree{.levels = {{"a"}}, .parent_of = {}}, 1),
                  std::invalid_argument);
}

TEST_CASE("tree text round-trips and rejects malformed input") {
  const LabelTree tree = default_taxonomy();
  const std::string text = format_tree(tree);
  std::istringstream in(text);
  const LabelTree back = parse_tree(in);
  CHECK(back.levels == tree.levels);
  CHECK(back.parent_of == tree.parent_of);
  CHECK(format_tree(back) == text);

  std::istringstream commented(
      "# a hierarchy\nlevels: 2\n\nlevel 0: a b  # leaves\nlevel 1: p\nparents 0: 0 0\n");
  const LabelTree small = parse_tree(commented);
  CHECK(small.size(0) == 2);
  CHECK(small.levels[1][0] == "p");

  const char* bad[] = {
      "level 0: a b\n",                                    // missing levels directive
      "levels: 2\nlevel 0: a b\nlevel 5: p\nparents 0: 0 0\n",  // index out of range
      "levels: 2\nlevel 0: a b\nlevel 1: p\nparents 0: 0 x\n",  // junk parent index
      "levels: 2\nlevel 0: a b\nlevel 1: p\nparents 0: 0 3\n",  // parent out of range
      "levels: 2\nlevel 0: a a\nlevel 1: p\nparents 0: 0 0\n",  // duplicate name
      "levels: 1\nlevel 0: a\nwhat: now\n",                // unknown directive
      "levels: 2\nlevel 0: a b\nlevel 0: c d\nlevel 1: p\nparents 0: 0 0\n",  // duplicate level
  };
  for (const char* text2 : bad) {
    std::istringstream s(text2);
    CHECK_THROWS_AS(parse_tree(s), FormatError);
  }
}

}  // TEST_SUITE
