#include "treemorph/planner.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

#include "treemorph/prufer.hpp"

namespace treemorph {

namespace {

// Current bundle around node lm: lm itself plus every subtree hanging from lm
// at an already-placed neighbor. By construction those subtrees contain only
// placed nodes.
std::vector<NodeId> bundle_members(const LabeledTree& tree, NodeId lm,
                                   const std::vector<char>& placed) {
  std::set<NodeId> members{lm};
  for (NodeId b : tree.neighbors(lm)) {
    if (!placed[b]) continue;
    SuperLeaf sub = subtree_rooted_at(tree, b, lm);
    members.insert(sub.members.begin(), sub.members.end());
  }
  return {members.begin(), members.end()};
}

void emit(TransformPlan& plan, LabeledTree& current, TopologyOp op, int stage) {
  current = treemorph::apply(current, op).tree;
  plan.steps.push_back(std::move(op));
  plan.stage_of_step.push_back(stage);
}

}  // namespace

TransformPlan plan_transform(const LabeledTree& initial, const LabeledTree& target) {
  if (initial.node_count() != target.node_count()) {
    throw Error(ErrorCode::SizeMismatch,
                std::to_string(initial.node_count()) + " vs " +
                    std::to_string(target.node_count()));
  }
  TransformPlan plan{initial, target, {}, {}, 0};
  const int n = initial.node_count();
  LabeledTree current = initial;

  const EliminationTrace trace = prufer_encode(target);
  std::vector<char> placed(static_cast<std::size_t>(n) + 1, 0);

  for (int m = 0; m < n - 2; ++m) {
    const NodeId lm = trace.removed_leaves[m];
    const NodeId pm = trace.attachments.symbols[m];
    const std::vector<NodeId> members = bundle_members(current, lm, placed);
    const bool singleton = members.size() == 1;

    std::vector<NodeId> outside;
    for (NodeId v : current.neighbors(lm)) {
      if (!placed[v]) outside.push_back(v);
    }

    NodeId attachment;
    if (outside.size() > 1) {
      // Collapse lm's other unplaced branches onto the neighbor toward pm, so
      // the bundle becomes a super-leaf and the transfer chain is shortest.
      const std::vector<NodeId> path = current.path_between(lm, pm);
      attachment = path[1];
      if (singleton) {
        emit(plan, current, Leafization{lm, attachment}, m + 1);
      } else {
        emit(plan, current, SuperLeafization{SuperLeaf{lm, members}, attachment},
             m + 1);
      }
    } else {
      attachment = outside.front();
    }

    const std::vector<NodeId> chain = current.path_between(attachment, pm);
    for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
      if (singleton) {
        emit(plan, current, LeafTransfer{lm, chain[i], chain[i + 1]}, m + 1);
      } else {
        emit(plan, current,
             SuperLeafTransfer{SuperLeaf{lm, members}, chain[i], chain[i + 1]},
             m + 1);
      }
    }
    placed[lm] = 1;
  }

  if (!(current == target)) {
    throw Error(ErrorCode::TreeInvariantBroken,
                "planner did not reach the target tree");
  }
  plan.intermediate_count = static_cast<int>(plan.steps.size());
  return plan;
}

ReplayResult replay(const TransformPlan& plan) {
  ReplayResult result{plan.initial, {}};
  for (const TopologyOp& op : plan.steps) {
    OpResult step = treemorph::apply(result.final_tree, op);
    result.final_tree = std::move(step.tree);
    result.log.push_back(std::move(step.log));
  }
  return result;
}

PlanLengthStats plan_length_stats(int n, int sample, std::uint64_t seed) {
  SplitMix64 rng(seed);
  PlanLengthStats stats;
  long long total = 0;
  for (int i = 0; i < sample; ++i) {
    const LabeledTree a = random_tree(n, rng);
    const LabeledTree b = random_tree(n, rng);
    const int len = static_cast<int>(plan_transform(a, b).steps.size());
    if (stats.sample_count == 0 || len < stats.min_steps) stats.min_steps = len;
    if (stats.sample_count == 0 || len > stats.max_steps) stats.max_steps = len;
    total += len;
    ++stats.sample_count;
  }
  if (stats.sample_count > 0) {
    stats.mean_steps = static_cast<double>(total) / stats.sample_count;
  }
  return stats;
}

namespace {

std::string edge_list(const LabeledTree& tree) {
  std::ostringstream out;
  bool first = true;
  for (const Edge& e : tree.edges()) {
    if (!first) out << " ";
    out << "(" << e.a << "," << e.b << ")";
    first = false;
  }
  return out.str();
}

std::vector<Edge> parse_edge_list(std::string_view text) {
  std::vector<Edge> edges;
  std::istringstream in{std::string(text)};
  std::string tok;
  while (in >> tok) {
    const std::size_t comma = tok.find(',');
    if (tok.size() < 5 || tok.front() != '(' || tok.back() != ')' ||
        comma == std::string::npos) {
      throw Error(ErrorCode::ParseError, "bad edge '" + tok + "'");
    }
    int a = 0, b = 0;
    const char* body = tok.data() + 1;
    auto ra = std::from_chars(body, tok.data() + comma, a);
    auto rb = std::from_chars(tok.data() + comma + 1, tok.data() + tok.size() - 1, b);
    if (ra.ec != std::errc{} || rb.ec != std::errc{}) {
      throw Error(ErrorCode::ParseError, "bad edge '" + tok + "'");
    }
    edges.push_back(make_edge(a, b));
  }
  return edges;
}

}  // namespace

std::string format_plan(const TransformPlan& plan) {
  std::ostringstream out;
  out << "plan n=" << plan.initial.node_count() << "\n";
  out << "initial " << edge_list(plan.initial) << "\n";
  out << "target " << edge_list(plan.target) << "\n";
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    out << "step " << plan.stage_of_step[i] << " " << format_op(plan.steps[i])
        << "\n";
  }
  return out.str();
}

TransformPlan parse_plan(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int n = 0;
  bool have_header = false;
  std::vector<Edge> initial_edges, target_edges;
  bool have_initial = false, have_target = false;
  TransformPlan plan;

  auto fail = [](const std::string& msg) -> void {
    throw Error(ErrorCode::ParseError, msg);
  };

  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    std::string rest;
    std::getline(ls, rest);
    if (kind == "plan") {
      const std::size_t eq = rest.find("n=");
      if (eq == std::string::npos) fail("plan header missing n=");
      n = std::atoi(rest.c_str() + eq + 2);
      have_header = true;
    } else if (kind == "initial") {
      initial_edges = parse_edge_list(rest);
      have_initial = true;
    } else if (kind == "target") {
      target_edges = parse_edge_list(rest);
      have_target = true;
    } else if (kind == "step") {
      std::istringstream ss(rest);
      int stage = 0;
      if (!(ss >> stage)) fail("step line missing stage");
      std::string op_text;
      std::getline(ss, op_text);
      plan.steps.push_back(parse_op(op_text));
      plan.stage_of_step.push_back(stage);
    } else {
      fail("unknown plan line '" + kind + "'");
    }
  }
  if (!have_header || !have_initial || !have_target) {
    fail("plan file needs plan/initial/target lines");
  }
  plan.initial = LabeledTree::from_edges(n, initial_edges);
  plan.target = LabeledTree::from_edges(n, target_edges);
  plan.intermediate_count = static_cast<int>(plan.steps.size());
  return plan;
}

}  // namespace treemorph
