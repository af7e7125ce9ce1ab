#include "doctest.h"

#include <set>
#include <sstream>

#include "dendroflow/level_set.hpp"
#include "dendroflow/tree.hpp"
#include "test_support.hpp"

using namespace dendroflow;
using testsupport::complete_binary_tree;
using testsupport::random_binary_tree;

namespace {

Tree cherry(double left, double right, double ghost) {
  return Tree::build({{kNoNode, 0.0}, {0, left}, {0, right}}, ghost);
}

std::vector<double> heights(const HarrisPath& h) {
  std::vector<double> out;
  for (auto [x, y] : h.breakpoints) out.push_back(y);
  return out;
}

void check_harris_invariants(const HarrisPath& h, double tree_length) {
  const auto& bp = h.breakpoints;
  REQUIRE(bp.size() >= 3);
  CHECK(bp.front().second == 0.0);
  CHECK(bp.back().second == 0.0);
  CHECK(h.span() == doctest::Approx(2.0 * tree_length));
  for (std::size_t i = 1; i < bp.size(); ++i) {
    double dx = bp[i].first - bp[i - 1].first;
    double dy = bp[i].second - bp[i - 1].second;
    CHECK(dx > 0.0);
    CHECK(std::abs(dy) == doctest::Approx(dx));  // slopes exactly +-1
    if (i + 1 < bp.size()) CHECK(bp[i].second > 0.0);
    if (i >= 2) {
      double prev = bp[i - 1].second - bp[i - 2].second;
      CHECK(prev * dy < 0.0);  // alternating slopes
    }
  }
}

}  // namespace

TEST_SUITE("tree") {

TEST_CASE("build: single node") {
  Tree t = Tree::build({{kNoNode, 0.0}}, 1.0);
  CHECK(t.size() == 1);
  CHECK(t.leaf_count() == 1);
  CHECK(t.length() == 1.0);
  CHECK(t.node(t.root()).is_leaf());
}

TEST_CASE("build: cherry lengths and order") {
  Tree t = cherry(1.0, 2.0, 1.0);
  CHECK(t.size() == 3);
  CHECK(t.length() == 4.0);
  const Node& root = t.node(t.root());
  REQUIRE(root.children.size() == 2);
  CHECK(t.node(root.children[0]).parent_edge_length == 1.0);
  CHECK(t.node(root.children[1]).parent_edge_length == 2.0);
}

TEST_CASE("build: malformed inputs") {
  // a -> b and b -> a
  CHECK_THROWS_AS(Tree::build({{1, 1.0}, {0, 1.0}}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Tree::build({{kNoNode, 0.0}, {0, -1.0}}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Tree::build({{kNoNode, 0.0}, {0, 0.0}}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Tree::build({{kNoNode, 0.0}, {kNoNode, 0.0}}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Tree::build({{kNoNode, 0.0}}, 0.0), std::invalid_argument);
  // self-parent inside an otherwise fine tree
  CHECK_THROWS_AS(Tree::build({{kNoNode, 0.0}, {1, 1.0}}, 1.0), std::invalid_argument);
}

TEST_CASE("harris path: cherry contour") {
  Tree t = cherry(1.0, 2.0, 1.0);
  HarrisPath h = harris_path(t);
  CHECK(heights(h) == std::vector<double>{0.0, 2.0, 1.0, 3.0, 0.0});
  check_harris_invariants(h, 4.0);
}

TEST_CASE("harris path: single node tent") {
  Tree t = Tree::build({{kNoNode, 0.0}}, 1.0);
  HarrisPath h = harris_path(t);
  CHECK(heights(h) == std::vector<double>{0.0, 1.0, 0.0});
  CHECK(h.span() == 2.0);
}

TEST_CASE("harris path: invariants on random trees") {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Tree t = random_binary_tree(seed, 400);
    check_harris_invariants(harris_path(t), t.length());
  }
}

TEST_CASE("shape: erases lengths, idempotent") {
  Tree t = cherry(1.0, 2.0, 3.0);
  Tree s = shape(t);
  CHECK(s.ghost_edge_length() == 1.0);
  for (const Node& nd : s.nodes()) CHECK(nd.parent_edge_length == 1.0);
  CHECK(same_tree(shape(s), s));
  CHECK(same_shape(t, cherry(5.0, 7.0, 2.0)));
  CHECK(!same_shape(t, complete_binary_tree(4)));
}

TEST_CASE("catalan: closed form against exhaustive enumeration") {
  CHECK(catalan_count(1) == 1);
  CHECK(catalan_count(3) == 2);
  CHECK(catalan_count(4) == 5);
  CHECK_THROWS_AS(catalan_count(0), std::domain_error);
  for (std::size_t n = 1; n <= 6; ++n) {
    auto shapes = enumerate_binary_shapes(n);
    CHECK(shapes.size() == catalan_count(n));
    std::set<std::string> sigs;
    for (const Tree& t : shapes) {
      CHECK(t.leaf_count() == n);
      sigs.insert(shape_signature(t));
    }
    CHECK(sigs.size() == shapes.size());  // all distinct
  }
}

TEST_CASE("serialization: bit-exact round trip") {
  Tree t = Tree::build({{kNoNode, 0.0}, {0, 1.23456789012e-3}, {0, 98765.4321098}, {1, 0.5}, {1, 7.25}},
                       0.333333333333);
  Tree back = parse_tree(serialize_tree(t));
  CHECK(same_tree(t, back));
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Tree r = random_binary_tree(seed);
    Tree rb = parse_tree(serialize_tree(r));
    // exponential lengths survive one 12-digit print/parse round trip only
    // approximately; the round trip of the *printed* form must be exact
    std::string once = serialize_tree(rb);
    CHECK(serialize_tree(parse_tree(once)) == once);
    CHECK(same_shape(r, rb));
  }
}

TEST_CASE("contract_single_child: chains collapse") {
  // root -> a -> b (path): everything contracts into the deepest vertex
  Tree path = Tree::build({{kNoNode, 0.0}, {0, 2.0}, {1, 3.0}}, 1.0);
  Tree c = contract_single_child(path);
  CHECK(c.size() == 1);
  CHECK(c.ghost_edge_length() == 6.0);

  // interior chain: root -> (leaf, u), u -> v, v -> (leaf, leaf)
  Tree t = Tree::build(
      {{kNoNode, 0.0}, {0, 1.0}, {0, 2.0}, {2, 3.0}, {3, 1.0}, {3, 1.5}}, 1.0);
  // make u unary: node 2 has single child 3
  Tree ct = contract_single_child(t);
  CHECK(ct.size() == 5);
  const Node& root = ct.node(ct.root());
  REQUIRE(root.children.size() == 2);
  CHECK(ct.node(root.children[1]).parent_edge_length == 5.0);  // 2 + 3 merged
  CHECK(ct.node(root.children[1]).children.size() == 2);
}

TEST_CASE("tree distance") {
  Tree t = cherry(1.0, 2.0, 1.0);
  const auto& ch = t.node(t.root()).children;
  CHECK(tree_distance(t, ch[0], ch[1]) == 3.0);
  CHECK(tree_distance(t, ch[0], ch[0]) == 0.0);
  CHECK(tree_distance(t, ch[0], t.root()) == 1.0);
}

TEST_CASE("harris round trip: level-set tree of the contour recovers the shape") {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    Tree t = random_binary_tree(seed, 200);
    HarrisPath h = harris_path(t);
    Series s;
    for (auto [x, y] : h.breakpoints) s.values.push_back(y);
    Tree back = level_set_tree(s);
    CHECK(same_shape(back, t));
    CHECK(back.length() == doctest::Approx(t.length()));
    ++checked;
  }
  CHECK(checked > 200);
}

}  // TEST_SUITE
