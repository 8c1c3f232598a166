#include "treemorph/prufer.hpp"

#include <queue>
#include <string>

namespace treemorph {

EliminationTrace prufer_encode(const LabeledTree& tree) {
  const int n = tree.node_count();
  std::vector<int> deg(static_cast<std::size_t>(n) + 1, 0);
  std::vector<char> removed(static_cast<std::size_t>(n) + 1, 0);
  for (NodeId v = 1; v <= n; ++v) deg[v] = tree.degree(v);

  // min-heap of current leaves; lowest label removed first
  std::priority_queue<NodeId, std::vector<NodeId>, std::greater<NodeId>> leaves;
  for (NodeId v = 1; v <= n; ++v) {
    if (deg[v] == 1) leaves.push(v);
  }

  EliminationTrace trace;
  trace.attachments.n = n;
  for (int step = 0; step < n - 2; ++step) {
    const NodeId leaf = leaves.top();
    leaves.pop();
    removed[leaf] = 1;
    NodeId attach = 0;
    for (NodeId w : tree.neighbors(leaf)) {
      if (!removed[w]) {
        attach = w;
        break;
      }
    }
    trace.removed_leaves.push_back(leaf);
    trace.attachments.symbols.push_back(attach);
    if (--deg[attach] == 1) leaves.push(attach);
  }
  return trace;
}

LabeledTree prufer_decode(const PruferSequence& seq) {
  const int n = seq.n;
  if (n < 2) {
    throw Error(ErrorCode::InvalidNodeCount,
                "sequence for n=" + std::to_string(n));
  }
  if (static_cast<int>(seq.symbols.size()) != n - 2) {
    throw Error(ErrorCode::WrongEdgeCount,
                "sequence length " + std::to_string(seq.symbols.size()) +
                    " for n=" + std::to_string(n));
  }
  std::vector<int> deg(static_cast<std::size_t>(n) + 1, 1);
  for (NodeId s : seq.symbols) {
    if (s < 1 || s > n) {
      throw Error(ErrorCode::SymbolOutOfRange,
                  "symbol " + std::to_string(s) + " with n=" + std::to_string(n));
    }
    ++deg[s];
  }

  std::priority_queue<NodeId, std::vector<NodeId>, std::greater<NodeId>> leaves;
  for (NodeId v = 1; v <= n; ++v) {
    if (deg[v] == 1) leaves.push(v);
  }

  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n) - 1);
  for (NodeId s : seq.symbols) {
    const NodeId leaf = leaves.top();
    leaves.pop();
    edges.push_back(make_edge(leaf, s));
    --deg[leaf];
    if (--deg[s] == 1) leaves.push(s);
  }
  const NodeId u = leaves.top();
  leaves.pop();
  const NodeId v = leaves.top();
  edges.push_back(make_edge(u, v));
  return LabeledTree::from_edges(n, std::move(edges));
}

std::uint64_t labeled_tree_count(int n) {
  if (n < 2 || n > kEnumerationCap) {
    throw Error(ErrorCode::CapExceeded,
                "census supports 2..=" + std::to_string(kEnumerationCap) +
                    ", got " + std::to_string(n));
  }
  std::uint64_t count = 1;
  for (int i = 0; i < n - 2; ++i) count *= static_cast<std::uint64_t>(n);
  return count;
}

LabeledTree tree_at_index(int n, std::uint64_t index) {
  const std::uint64_t total = labeled_tree_count(n);
  if (index >= total) {
    throw Error(ErrorCode::CapExceeded, "index " + std::to_string(index) +
                                            " out of " + std::to_string(total));
  }
  PruferSequence seq;
  seq.n = n;
  seq.symbols.assign(static_cast<std::size_t>(n > 2 ? n - 2 : 0), 1);
  // most-significant digit first => lexicographic order of sequences
  for (int pos = n - 3; pos >= 0; --pos) {
    seq.symbols[pos] = static_cast<NodeId>(index % n) + 1;
    index /= n;
  }
  return prufer_decode(seq);
}

void enumerate_trees(int n, const std::function<void(const LabeledTree&)>& fn) {
  const std::uint64_t total = labeled_tree_count(n);
  for (std::uint64_t i = 0; i < total; ++i) fn(tree_at_index(n, i));
}

LabeledTree random_tree(int n, SplitMix64& rng) {
  if (n < 2) {
    throw Error(ErrorCode::InvalidNodeCount, "n=" + std::to_string(n));
  }
  PruferSequence seq;
  seq.n = n;
  seq.symbols.reserve(static_cast<std::size_t>(n > 2 ? n - 2 : 0));
  for (int i = 0; i < n - 2; ++i) {
    seq.symbols.push_back(static_cast<NodeId>(rng.next_below(n)) + 1);
  }
  return prufer_decode(seq);
}

}  // namespace treemorph
