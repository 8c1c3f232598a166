#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "treemorph/error.hpp"

namespace treemorph {

using NodeId = int;  // labels are 1-based and dense: 1..n

struct Edge {
  NodeId a = 0;  // canonical form keeps a < b
  NodeId b = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

inline Edge make_edge(NodeId u, NodeId v) {
  return u < v ? Edge{u, v} : Edge{v, u};
}

// A validated labeled tree on nodes 1..n. Immutable after construction: the
// edge set is stored sorted/canonical so trees compare by value, and the
// adjacency lists are precomputed once.
class LabeledTree {
 public:
  // Empty placeholder (n=0); every usable tree comes from from_edges. Node
  // queries on the placeholder throw NodeOutOfRange.
  LabeledTree() = default;

  // Validates and canonicalizes. Connectivity is checked before the edge
  // count so that a two-component candidate reports Disconnected even when
  // its count is also wrong.
  static LabeledTree from_edges(int n, std::vector<Edge> edges);

  int node_count() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }

  const std::vector<NodeId>& neighbors(NodeId v) const;
  int degree(NodeId v) const;
  bool has_edge(NodeId u, NodeId v) const;

  // Unique simple path from s to d, inclusive of both endpoints.
  std::vector<NodeId> path_between(NodeId s, NodeId d) const;

  friend bool operator==(const LabeledTree& x, const LabeledTree& y) {
    return x.n_ == y.n_ && x.edges_ == y.edges_;
  }

 private:
  int n_ = 0;
  std::vector<Edge> edges_;               // sorted ascending
  std::vector<std::vector<NodeId>> adj_;  // 1-based; adj_[v] sorted
};

// A rooted hanging subtree: `members` (sorted, includes root) plus the root
// through which it attaches to the rest of the tree.
struct SuperLeaf {
  NodeId root = 0;
  std::vector<NodeId> members;

  friend bool operator==(const SuperLeaf&, const SuperLeaf&) = default;
};

// Members of the subtree hanging from j on the far side of the edge
// (j, away_from): every node whose path to away_from passes through j.
SuperLeaf subtree_rooted_at(const LabeledTree& tree, NodeId j, NodeId away_from);

// True iff members induce a connected subtree containing root, no member
// other than root touches the outside, and root has exactly one outside
// neighbor.
bool is_super_leaf(const LabeledTree& tree, const SuperLeaf& s);

// 0/1 symmetric matrix, usable for trees and for proximity graphs alike.
struct AdjacencyMatrix {
  int n = 0;
  std::vector<std::uint8_t> cells;  // row-major n*n

  static AdjacencyMatrix from_tree(const LabeledTree& tree);

  bool at(int i, int j) const { return cells[static_cast<std::size_t>(i) * n + j] != 0; }
  void set(int i, int j) {
    cells[static_cast<std::size_t>(i) * n + j] = 1;
    cells[static_cast<std::size_t>(j) * n + i] = 1;
  }
};

// Text edge-list format: header line "n=<N>", then one "u v" line per edge.
// Blank lines and lines starting with '#' are ignored on input.
std::string format_tree_text(const LabeledTree& tree);
LabeledTree parse_tree_text(std::string_view text);

}  // namespace treemorph
