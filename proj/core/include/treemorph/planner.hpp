#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "treemorph/ops.hpp"
#include "treemorph/rng.hpp"
#include "treemorph/tree.hpp"

namespace treemorph {

// A sequence of topology operations turning `initial` into `target`.
// stage_of_step[i] is the 1-based elimination index the step serves; steps
// sharing a stage place the same node.
struct TransformPlan {
  LabeledTree initial;
  LabeledTree target;
  std::vector<TopologyOp> steps;
  std::vector<int> stage_of_step;
  int intermediate_count = 0;
};

// Constructive planner: walks the target's elimination trace, bundling each
// next node with its already-placed subtrees and carrying the bundle to its
// target attachment. Throws SizeMismatch when node counts differ.
TransformPlan plan_transform(const LabeledTree& initial, const LabeledTree& target);

struct ReplayResult {
  LabeledTree final_tree;
  std::vector<OpLogEntry> log;
};

// Folds apply() over the plan's steps; propagates operation errors.
ReplayResult replay(const TransformPlan& plan);

struct PlanLengthStats {
  int sample_count = 0;
  int min_steps = 0;
  int max_steps = 0;
  double mean_steps = 0.0;
};

// Plans over `sample` random tree pairs drawn from the given seed.
PlanLengthStats plan_length_stats(int n, int sample, std::uint64_t seed);

// Text form: header lines (plan n=<N>, initial <edges>, target <edges>)
// followed by one `step <stage> <op>` line per step.
std::string format_plan(const TransformPlan& plan);
TransformPlan parse_plan(std::string_view text);

}  // namespace treemorph
