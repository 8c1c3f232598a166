#pragma once

#include <string>
#include <string_view>
#include <variant>

#include "treemorph/tree.hpp"

namespace treemorph {

// The four local rewiring operations. All are pure: they take a tree and
// return a new tree plus a log entry; precondition violations throw.

struct Leafization {  // L(j,k): every edge (j,p), p != k, becomes (k,p)
  NodeId j = 0;
  NodeId k = 0;
};

struct LeafTransfer {  // LT(l,j,k): leaf l re-attaches from j to j's neighbor k
  NodeId l = 0;
  NodeId j = 0;
  NodeId k = 0;
};

struct SuperLeafization {  // SL(s,k): make s a super-leaf attached only at k
  SuperLeaf s;
  NodeId k = 0;
};

struct SuperLeafTransfer {  // SLT(s,j,k): super-leaf s re-attaches from j to k
  SuperLeaf s;
  NodeId j = 0;
  NodeId k = 0;
};

using TopologyOp =
    std::variant<Leafization, LeafTransfer, SuperLeafization, SuperLeafTransfer>;

// Record of one applied operation. For every added edge, `certificates`
// holds the path between its endpoints in the pre-op tree; each path has at
// most 2 hops, which is exactly the locality guarantee the audit checks.
struct OpLogEntry {
  TopologyOp op;
  std::vector<Edge> removed;
  std::vector<Edge> added;
  std::vector<std::vector<NodeId>> certificates;  // parallel to `added`

  friend bool operator==(const OpLogEntry&, const OpLogEntry&);
};

struct OpResult {
  LabeledTree tree;
  OpLogEntry log;
};

OpResult leafization(const LabeledTree& tree, NodeId j, NodeId k);
OpResult leaf_transfer(const LabeledTree& tree, NodeId l, NodeId j, NodeId k);
OpResult super_leafization(const LabeledTree& tree, const SuperLeaf& s, NodeId k);
OpResult super_leaf_transfer(const LabeledTree& tree, const SuperLeaf& s,
                             NodeId j, NodeId k);

// Dispatch on the variant; re-validates the result tree and throws
// TreeInvariantBroken if an operation ever produced a non-tree.
OpResult apply(const LabeledTree& tree, const TopologyOp& op);

// Nodes whose incident edges change (endpoints of removed/added), sorted.
std::vector<NodeId> touched_nodes(const OpLogEntry& entry);

// One line per entry: "<kind> <args> | -<edges> | +<edges> | cert <paths>".
// Example: LT 4 2 3 | -(2,4) | +(3,4) | cert 3-4:4,2,3
std::string format_op(const TopologyOp& op);
std::string format_op_log_entry(const OpLogEntry& entry);
TopologyOp parse_op(std::string_view text);
OpLogEntry parse_op_log_entry(std::string_view line);

}  // namespace treemorph
