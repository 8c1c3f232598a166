#pragma once

#include <cstdint>
#include <functional>

#include "treemorph/rng.hpp"
#include "treemorph/tree.hpp"

namespace treemorph {

// Sequence of n-2 node labels; the codec below is a bijection between these
// and labeled trees on n nodes.
struct PruferSequence {
  int n = 0;
  std::vector<NodeId> symbols;

  friend bool operator==(const PruferSequence&, const PruferSequence&) = default;
};

// Full elimination record: removed_leaves[m] is the lowest-labeled leaf
// removed at step m and attachments.symbols[m] its neighbor at that moment.
struct EliminationTrace {
  std::vector<NodeId> removed_leaves;
  PruferSequence attachments;
};

EliminationTrace prufer_encode(const LabeledTree& tree);
LabeledTree prufer_decode(const PruferSequence& seq);

// Exhaustive enumeration is capped: beyond this the n^(n-2) census is not
// worth materializing.
inline constexpr int kEnumerationCap = 7;

std::uint64_t labeled_tree_count(int n);  // n^(n-2), n up to the cap

// Tree for the index-th sequence in lexicographic order (0-based). Allows
// sharded exhaustive sweeps without materializing the whole census.
LabeledTree tree_at_index(int n, std::uint64_t index);

void enumerate_trees(int n, const std::function<void(const LabeledTree&)>& fn);

// Uniform over all labeled trees on n nodes (uniform random sequence).
LabeledTree random_tree(int n, SplitMix64& rng);

}  // namespace treemorph
