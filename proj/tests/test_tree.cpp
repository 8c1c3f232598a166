#include <doctest.h>

#include <algorithm>
#include <functional>
#include <set>

#include "treemorph/prufer.hpp"
#include "treemorph/rng.hpp"
#include "treemorph/tree.hpp"

using namespace treemorph;

namespace {

LabeledTree tree_of(int n, std::vector<Edge> edges) {
  return LabeledTree::from_edges(n, std::move(edges));
}

LabeledTree path_tree(int n) {
  std::vector<Edge> edges;
  for (int v = 1; v < n; ++v) edges.push_back({v, v + 1});
  return tree_of(n, std::move(edges));
}

LabeledTree star_tree(int n, NodeId center = 1) {
  std::vector<Edge> edges;
  for (int v = 1; v <= n; ++v)
    if (v != center) edges.push_back(make_edge(center, v));
  return tree_of(n, std::move(edges));
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::BadConfig;  // sentinel: nothing thrown
}

}  // namespace

TEST_CASE("tree validation accepts trees and names each defect") {
  CHECK_NOTHROW(tree_of(2, {{1, 2}}));
  CHECK_NOTHROW(tree_of(4, {{1, 2}, {2, 3}, {3, 4}}));

  CHECK(code_of([] { tree_of(4, {{1, 2}, {3, 4}}); }) == ErrorCode::Disconnected);
  CHECK(code_of([] { tree_of(3, {{1, 2}, {2, 3}, {1, 3}}); }) ==
        ErrorCode::WrongEdgeCount);
  CHECK(code_of([] { tree_of(3, {{1, 2}, {2, 2}}); }) == ErrorCode::SelfLoop);
  CHECK(code_of([] { tree_of(3, {{1, 2}, {2, 1}}); }) == ErrorCode::DuplicateEdge);
  CHECK(code_of([] { tree_of(3, {{1, 2}, {2, 5}}); }) == ErrorCode::NodeOutOfRange);
  CHECK(code_of([] { tree_of(1, {}); }) == ErrorCode::InvalidNodeCount);
}

TEST_CASE("edges canonicalize and compare by value") {
  const LabeledTree a = tree_of(3, {{2, 1}, {3, 2}});
  const LabeledTree b = tree_of(3, {{2, 3}, {1, 2}});
  CHECK(a == b);
  CHECK(a.edges() == std::vector<Edge>{{1, 2}, {2, 3}});
  CHECK(a.has_edge(2, 1));
  CHECK_FALSE(a.has_edge(1, 3));
}

TEST_CASE("neighbors and degree") {
  const LabeledTree path = path_tree(3);
  CHECK(path.neighbors(2) == std::vector<NodeId>{1, 3});
  CHECK(path.neighbors(3) == std::vector<NodeId>{2});
  CHECK(path.degree(2) == 2);

  const LabeledTree star = star_tree(5);
  CHECK(star.neighbors(1) == std::vector<NodeId>{2, 3, 4, 5});
  CHECK(star.degree(1) == 4);
  CHECK(star.degree(3) == 1);

  CHECK_THROWS_AS((void)path.neighbors(0), Error);
  CHECK_THROWS_AS((void)path.degree(4), Error);
  CHECK_THROWS_AS((void)LabeledTree().neighbors(1), Error);
}

TEST_CASE("path_between walks the unique path") {
  const LabeledTree path = path_tree(4);
  CHECK(path.path_between(1, 4) == std::vector<NodeId>{1, 2, 3, 4});
  CHECK(path.path_between(2, 2) == std::vector<NodeId>{2});

  const LabeledTree star = star_tree(5);
  CHECK(star.path_between(2, 3) == std::vector<NodeId>{2, 1, 3});
}

TEST_CASE("path reversal symmetry on random trees") {
  SplitMix64 rng(7);
  for (int iter = 0; iter < 20; ++iter) {
    const int n = 2 + static_cast<int>(rng.next_below(10));
    const LabeledTree t = random_tree(n, rng);
    for (NodeId s = 1; s <= n; ++s) {
      for (NodeId d = s; d <= n; ++d) {
        std::vector<NodeId> fwd = t.path_between(s, d);
        std::vector<NodeId> back = t.path_between(d, s);
        std::reverse(back.begin(), back.end());
        CHECK(fwd == back);
      }
    }
  }
}

TEST_CASE("degree sum law") {
  SplitMix64 rng(11);
  for (int iter = 0; iter < 30; ++iter) {
    const int n = 2 + static_cast<int>(rng.next_below(40));
    const LabeledTree t = random_tree(n, rng);
    int sum = 0;
    for (NodeId v = 1; v <= n; ++v) sum += t.degree(v);
    CHECK(sum == 2 * (n - 1));
  }
}

TEST_CASE("subtree_rooted_at collects the hanging side") {
  const LabeledTree path = path_tree(4);
  CHECK(subtree_rooted_at(path, 3, 2).members == std::vector<NodeId>{3, 4});
  CHECK(subtree_rooted_at(path, 4, 3).members == std::vector<NodeId>{4});

  const LabeledTree star = star_tree(5);
  CHECK(subtree_rooted_at(star, 1, 2).members == std::vector<NodeId>{1, 3, 4, 5});

  CHECK(code_of([&] { subtree_rooted_at(path, 1, 3); }) == ErrorCode::NotAnEdge);
}

TEST_CASE("the two sides of an edge partition the nodes") {
  SplitMix64 rng(13);
  for (int iter = 0; iter < 20; ++iter) {
    const int n = 2 + static_cast<int>(rng.next_below(12));
    const LabeledTree t = random_tree(n, rng);
    for (const Edge& e : t.edges()) {
      const SuperLeaf left = subtree_rooted_at(t, e.a, e.b);
      const SuperLeaf right = subtree_rooted_at(t, e.b, e.a);
      std::set<NodeId> all(left.members.begin(), left.members.end());
      all.insert(right.members.begin(), right.members.end());
      CHECK(static_cast<int>(left.members.size() + right.members.size()) == n);
      CHECK(static_cast<int>(all.size()) == n);
    }
  }
}

TEST_CASE("is_super_leaf checks the single-attachment shape") {
  const LabeledTree path = path_tree(4);
  CHECK(is_super_leaf(path, SuperLeaf{3, {3, 4}}));
  CHECK_FALSE(is_super_leaf(path, SuperLeaf{2, {2, 3}}));  // 3 leaks to 4
  CHECK(is_super_leaf(path, SuperLeaf{4, {4}}));
  CHECK_FALSE(is_super_leaf(path, SuperLeaf{1, {1, 2, 3, 4}}));  // nothing outside
}

TEST_CASE("adjacency matrix mirrors the edge set") {
  const LabeledTree t = tree_of(4, {{1, 2}, {2, 3}, {2, 4}});
  const AdjacencyMatrix adj = AdjacencyMatrix::from_tree(t);
  CHECK(adj.n == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK_FALSE(adj.at(i, i));
    for (int j = 0; j < 4; ++j) {
      CHECK(adj.at(i, j) == adj.at(j, i));
      CHECK(adj.at(i, j) == t.has_edge(i + 1, j + 1));
    }
  }
}

TEST_CASE("tree text roundtrip") {
  SplitMix64 rng(17);
  for (int iter = 0; iter < 10; ++iter) {
    const LabeledTree t = random_tree(2 + static_cast<int>(rng.next_below(20)), rng);
    CHECK(parse_tree_text(format_tree_text(t)) == t);
  }

  const LabeledTree parsed = parse_tree_text("# comment\nn=3\n\n1 2\n2 3\n");
  CHECK(parsed == path_tree(3));

  CHECK_THROWS_AS(parse_tree_text("2 3\n"), Error);        // missing header
  CHECK_THROWS_AS(parse_tree_text("n=3\nx y\n1 2\n"), Error);  // garbage line
  CHECK_THROWS_AS(parse_tree_text("n=3\n1 2\n"), Error);   // wrong edge count
}
