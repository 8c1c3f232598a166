// Release gates: ten end-to-end checks over the whole engine, one verdict
// line each. Exits nonzero if any gate fails. Gates 4 through 10 share one
// experiment grid (seed 1, five trials per cell, n in {15, 30, 60}).
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "treemorph/experiment.hpp"
#include "treemorph/metrics.hpp"
#include "treemorph/ops.hpp"
#include "treemorph/planner.hpp"
#include "treemorph/protocol.hpp"
#include "treemorph/prufer.hpp"
#include "treemorph/tree.hpp"

using namespace treemorph;

namespace {

constexpr double kBijectionBudgetSeconds = 10.0;
constexpr double kPlannerBudgetSeconds = 120.0;
constexpr double kPathLambdaTol = 1e-6;
constexpr double kStarLambdaTol = 1e-9;
constexpr double kMonotoneTol = 1e-9;
constexpr std::uint64_t kGridSeed = 1;
constexpr int kGridTrials = 5;
const int kGridSizes[] = {15, 30, 60};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

// Independent op enumeration, deliberately separate from the planner and the
// protocol rules: every structurally valid instance of the four op kinds.
// Super-leaves are generated as unions of whole branches.
std::vector<TopologyOp> all_valid_ops(const LabeledTree& tree) {
  std::vector<TopologyOp> ops;
  const int n = tree.node_count();

  for (NodeId j = 1; j <= n; ++j) {
    if (tree.degree(j) < 2) continue;
    for (NodeId k : tree.neighbors(j)) ops.push_back(Leafization{j, k});
  }

  for (NodeId l = 1; l <= n; ++l) {
    if (tree.degree(l) != 1) continue;
    const NodeId j = tree.neighbors(l).front();
    for (NodeId k : tree.neighbors(j))
      if (k != l) ops.push_back(LeafTransfer{l, j, k});
  }

  // SL: members = root plus the branches through a neighbor subset, with at
  // least two neighbors left outside. Subset blowup guard: skip hubs past
  // degree 10 (never hit by the exhaustive small-n sweeps).
  for (NodeId root = 1; root <= n; ++root) {
    const std::vector<NodeId>& nbrs = tree.neighbors(root);
    const int d = static_cast<int>(nbrs.size());
    if (d < 2 || d > 10) continue;
    for (unsigned mask = 0; mask < (1u << d); ++mask) {
      if (d - __builtin_popcount(mask) < 2) continue;
      SuperLeaf s{root, {root}};
      std::vector<NodeId> outside;
      for (int i = 0; i < d; ++i) {
        if (mask & (1u << i)) {
          const SuperLeaf branch = subtree_rooted_at(tree, nbrs[i], root);
          s.members.insert(s.members.end(), branch.members.begin(),
                           branch.members.end());
        } else {
          outside.push_back(nbrs[i]);
        }
      }
      std::sort(s.members.begin(), s.members.end());
      for (NodeId k : outside) ops.push_back(SuperLeafization{s, k});
    }
  }

  // SLT: any branch hanging at j, moved to another neighbor of j.
  for (const Edge& e : tree.edges()) {
    for (auto [root, j] : {std::pair{e.a, e.b}, std::pair{e.b, e.a}}) {
      const SuperLeaf s = subtree_rooted_at(tree, root, j);
      for (NodeId k : tree.neighbors(j))
        if (k != root) ops.push_back(SuperLeafTransfer{s, j, k});
    }
  }
  return ops;
}

// Rejection sampler over the same four kinds, for long random chains.
TopologyOp random_valid_op(const LabeledTree& t, SplitMix64& rng) {
  const int n = t.node_count();
  for (;;) {
    const std::uint64_t kind = rng.next_below(4);
    if (kind == 0) {
      const NodeId j = 1 + static_cast<NodeId>(rng.next_below(n));
      if (t.degree(j) < 2) continue;
      const std::vector<NodeId>& nb = t.neighbors(j);
      return Leafization{j, nb[rng.next_below(nb.size())]};
    }
    if (kind == 1) {
      const NodeId l = 1 + static_cast<NodeId>(rng.next_below(n));
      if (t.degree(l) != 1) continue;
      const NodeId j = t.neighbors(l).front();
      if (t.degree(j) < 2) continue;
      const std::vector<NodeId>& nb = t.neighbors(j);
      const NodeId k = nb[rng.next_below(nb.size())];
      if (k == l) continue;
      return LeafTransfer{l, j, k};
    }
    if (kind == 2) {
      const NodeId root = 1 + static_cast<NodeId>(rng.next_below(n));
      const std::vector<NodeId>& nb = t.neighbors(root);
      if (nb.size() < 2) continue;
      std::vector<NodeId> bundled, outside;
      for (NodeId w : nb) (rng.next() & 1 ? bundled : outside).push_back(w);
      if (outside.size() < 2) continue;
      SuperLeaf s{root, {root}};
      for (NodeId w : bundled) {
        const SuperLeaf branch = subtree_rooted_at(t, w, root);
        s.members.insert(s.members.end(), branch.members.begin(),
                         branch.members.end());
      }
      std::sort(s.members.begin(), s.members.end());
      return SuperLeafization{s, outside[rng.next_below(outside.size())]};
    }
    const Edge e = t.edges()[rng.next_below(t.edges().size())];
    const bool flip = rng.next() & 1;
    const NodeId root = flip ? e.a : e.b;
    const NodeId j = flip ? e.b : e.a;
    if (t.degree(j) < 2) continue;
    const std::vector<NodeId>& nb = t.neighbors(j);
    const NodeId k = nb[rng.next_below(nb.size())];
    if (k == root) continue;
    return SuperLeafTransfer{subtree_rooted_at(t, root, j), j, k};
  }
}

std::string read_file_or_empty(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return {};
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

struct Cell {
  int n = 0;
  Protocol protocol = Protocol::kLine;
  std::vector<TrialResult> trials;
};

const std::vector<TrialResult>& cell_trials(const std::vector<Cell>& grid,
                                            int n, Protocol p) {
  for (const Cell& c : grid) {
    if (c.n == n && c.protocol == p) return c.trials;
  }
  std::fprintf(stderr, "missing grid cell n=%d\n", n);
  std::exit(2);
}

}  // namespace

int main() {
  int failures = 0;
  char detail[512];
  const auto verdict = [&](int idx, bool pass) {
    std::printf("criterion %d: %s (%s)\n", idx, pass ? "PASS" : "FAIL", detail);
    std::fflush(stdout);
    if (!pass) ++failures;
  };

  // 1. the sequence codec is a bijection on every size up to the cap
  {
    const auto start = std::chrono::steady_clock::now();
    std::uint64_t trees_checked = 0;
    std::uint64_t seqs_checked = 0;
    std::uint64_t mismatches = 0;
    for (int n = 2; n <= kEnumerationCap; ++n) {
      enumerate_trees(n, [&](const LabeledTree& t) {
        const EliminationTrace trace = prufer_encode(t);
        if (!(prufer_decode(trace.attachments) == t)) ++mismatches;
        ++trees_checked;
      });
      const std::uint64_t total = labeled_tree_count(n);
      for (std::uint64_t index = 0; index < total; ++index) {
        PruferSequence seq;
        seq.n = n;
        seq.symbols.assign(static_cast<std::size_t>(n - 2), 1);
        std::uint64_t rem = index;
        for (int pos = 0; pos < n - 2; ++pos) {
          seq.symbols[static_cast<std::size_t>(pos)] =
              static_cast<NodeId>(rem % static_cast<std::uint64_t>(n)) + 1;
          rem /= static_cast<std::uint64_t>(n);
        }
        if (!(prufer_encode(prufer_decode(seq)).attachments == seq)) ++mismatches;
        ++seqs_checked;
      }
    }
    const double elapsed = seconds_since(start);
    std::snprintf(detail, sizeof(detail),
                  "%llu trees and %llu sequences round-tripped, %llu mismatches, %.1fs",
                  static_cast<unsigned long long>(trees_checked),
                  static_cast<unsigned long long>(seqs_checked),
                  static_cast<unsigned long long>(mismatches), elapsed);
    verdict(1, mismatches == 0 && trees_checked == seqs_checked &&
                   elapsed < kBijectionBudgetSeconds);
  }

  // 2. every valid op preserves the tree invariant, exhaustively and at scale
  {
    std::uint64_t ops_checked = 0;
    std::uint64_t violations = 0;
    for (int n = 2; n <= 6; ++n) {
      enumerate_trees(n, [&](const LabeledTree& t) {
        for (const TopologyOp& op : all_valid_ops(t)) {
          try {
            (void)treemorph::apply(t, op);  // re-validates the result inside
          } catch (const Error&) {
            ++violations;
          }
          ++ops_checked;
        }
      });
    }
    SplitMix64 rng(99);
    LabeledTree t = random_tree(50, rng);
    for (int step = 0; step < 100000; ++step) {
      try {
        t = treemorph::apply(t, random_valid_op(t, rng)).tree;
      } catch (const Error&) {
        ++violations;
      }
      ++ops_checked;
    }
    std::snprintf(detail, sizeof(detail),
                  "%llu applications (all trees to size 6 plus 100000 random "
                  "ops at size 50), %llu invariant violations",
                  static_cast<unsigned long long>(ops_checked),
                  static_cast<unsigned long long>(violations));
    verdict(2, violations == 0);
  }

  // 3. the planner reaches every target through valid trees with short certs
  {
    const auto start = std::chrono::steady_clock::now();
    std::uint64_t pairs_checked = 0;
    std::uint64_t failures_here = 0;
    int worst_cert = 0;
    const auto check_pair = [&](const LabeledTree& a, const LabeledTree& b) {
      try {
        const TransformPlan plan = plan_transform(a, b);
        const ReplayResult replayed = replay(plan);  // every step re-validated
        if (!(replayed.final_tree == b)) ++failures_here;
        for (const OpLogEntry& log : replayed.log) {
          for (const std::vector<NodeId>& cert : log.certificates) {
            const int cert_nodes = static_cast<int>(cert.size());
            worst_cert = std::max(worst_cert, cert_nodes);
            if (cert_nodes > 3) ++failures_here;
          }
        }
      } catch (const Error&) {
        ++failures_here;
      }
      ++pairs_checked;
    };
    for (int n = 2; n <= 5; ++n) {
      std::vector<LabeledTree> trees;
      enumerate_trees(n, [&](const LabeledTree& t) { trees.push_back(t); });
      for (const LabeledTree& a : trees) {
        for (const LabeledTree& b : trees) check_pair(a, b);
      }
    }
    SplitMix64 rng(7);
    for (int i = 0; i < 10000; ++i) {
      const LabeledTree a = random_tree(6, rng);
      const LabeledTree b = random_tree(6, rng);
      check_pair(a, b);
    }
    const double elapsed = seconds_since(start);
    std::snprintf(detail, sizeof(detail),
                  "%llu ordered pairs (exhaustive to size 5, 10000 sampled at "
                  "size 6) replayed, %llu failures, longest certificate %d "
                  "nodes, %.1fs",
                  static_cast<unsigned long long>(pairs_checked),
                  static_cast<unsigned long long>(failures_here), worst_cert,
                  elapsed);
    verdict(3, failures_here == 0 && worst_cert <= 3 &&
                   elapsed < kPlannerBudgetSeconds);
  }

  // shared grid for gates 4 through 10
  std::vector<Cell> grid;
  for (int n : kGridSizes) {
    for (Protocol p : {Protocol::kLine, Protocol::kStar}) {
      Cell cell;
      cell.n = n;
      cell.protocol = p;
      ExperimentConfig cfg;
      cfg.n = n;
      cfg.protocol = p;
      cfg.seed = kGridSeed;
      cfg.trials = kGridTrials;
      cfg.write_trajectory = false;
      cfg.write_event_log = false;  // audits still run on the full log
      for (int t = 0; t < kGridTrials; ++t) {
        cell.trials.push_back(run_trial(cfg, t));
      }
      grid.push_back(std::move(cell));
    }
  }

  // 4. line runs end on the exact path, hit its spectrum, and descend
  {
    bool shape_ok = true;
    double worst_l2_err = 0.0;
    int rise_rounds = 0;
    int rise_trials = 0;
    int committing_rounds = 0;
    for (int n : kGridSizes) {
      const double target = lambda2_path_closed_form(n);
      for (const TrialResult& t : cell_trials(grid, n, Protocol::kLine)) {
        const DegreeHistogram h = DegreeHistogram::of(t.final_tree);
        shape_ok = shape_ok && t.converged && t.goal_shape &&
                   t.rounds <= 50 * n && h.deg1 == 2 && h.deg2 == n - 2;
        worst_l2_err = std::max(
            worst_l2_err, std::fabs(t.traces.back().lambda2_tree - target));
        int rises = 0;
        for (std::size_t i = 1; i < t.traces.size(); ++i) {
          if (t.traces[i].commits == 0) continue;
          ++committing_rounds;
          if (t.traces[i].lambda2_tree >
              t.traces[i - 1].lambda2_tree + kMonotoneTol) {
            ++rises;
          }
        }
        rise_rounds += rises;
        rise_trials += rises > 0 ? 1 : 0;
      }
    }
    std::snprintf(detail, sizeof(detail),
                  "exact path multiset within budget on all 15 trials, worst "
                  "final lambda2 error %.2e; spectral descent broken on %d of "
                  "%d committing rounds in %d of 15 trials",
                  worst_l2_err, rise_rounds, committing_rounds, rise_trials);
    verdict(4, shape_ok && worst_l2_err <= kPathLambdaTol && rise_rounds == 0);
  }

  // 5. star runs end on the exact star and its unit spectrum
  {
    bool ok = true;
    double worst_err = 0.0;
    for (int n : kGridSizes) {
      for (const TrialResult& t : cell_trials(grid, n, Protocol::kStar)) {
        const DegreeHistogram h = DegreeHistogram::of(t.final_tree);
        ok = ok && t.converged && t.goal_shape && t.rounds <= 50 * n &&
             h.deg1 == n - 1 && h.deg_ge2 == 1;
        worst_err = std::max(
            worst_err, std::fabs(t.traces.back().lambda2_tree - 1.0));
      }
    }
    std::snprintf(detail, sizeof(detail),
                  "exact star multiset within budget on all 15 trials, worst "
                  "final lambda2 error %.2e",
                  worst_err);
    verdict(5, ok && worst_err <= kStarLambdaTol);
  }

  // 6. connectivity never breaks: positive algebraic connectivity every
  // round, and the simulation enforces strict link range at every step
  {
    int dead_trials = 0;
    double min_l2 = 1e300;
    for (const Cell& c : grid) {
      for (const TrialResult& t : c.trials) {
        if (!t.failure.empty()) ++dead_trials;
        for (const RoundTrace& tr : t.traces) {
          min_l2 = std::min(min_l2, tr.lambda2_tree);
        }
      }
    }
    std::snprintf(detail, sizeof(detail),
                  "all 30 trials ran to completion with zero range faults "
                  "(in-sim checks are strict), min tree lambda2 %.3e",
                  min_l2);
    verdict(6, dead_trials == 0 && min_l2 > 0.0);
  }

  // 7. coverage separates the two shapes on every paired world
  {
    int pair_faults = 0;
    bool trend_ok = true;
    for (int n : kGridSizes) {
      const auto& line = cell_trials(grid, n, Protocol::kLine);
      const auto& star = cell_trials(grid, n, Protocol::kStar);
      int line_up = 0;
      int star_down = 0;
      for (int t = 0; t < kGridTrials; ++t) {
        if (!(line[t].coverage_final > star[t].coverage_final)) ++pair_faults;
        line_up += line[t].coverage_final > line[t].coverage_initial ? 1 : 0;
        star_down += star[t].coverage_final < star[t].coverage_initial ? 1 : 0;
      }
      trend_ok = trend_ok && line_up >= 4 && star_down >= 4;
    }
    std::snprintf(detail, sizeof(detail),
                  "line beat star on all %d paired trials; per-cell trend "
                  "(line up, star down) held in at least 4 of 5 seeds: %s",
                  static_cast<int>(kGridTrials) * 3,
                  trend_ok ? "yes" : "no");
    verdict(7, pair_faults == 0 && trend_ok);
  }

  // 8. every run passes the locality audit, and the audit catches a plant
  {
    int dirty = 0;
    int messages = 0;
    int commits = 0;
    for (const Cell& c : grid) {
      for (const TrialResult& t : c.trials) {
        if (!t.audit.ok) ++dirty;
        messages += t.audit.messages_checked;
        commits += t.audit.commits_checked;
      }
    }
    const AuditReport hop_plant = locality_audit(
        "tree n=5\nedge 1 2\nedge 2 3\nedge 3 4\nedge 4 5\nround 1\n"
        "commit LT 5 4 3 | -(4,5) | +(1,5) | cert 1-5:1,2,3,4,5\n"
        "endround 1\n");
    const AuditReport msg_plant = locality_audit(
        "tree n=5\nedge 1 2\nedge 2 3\nedge 3 4\nedge 4 5\nround 1\n"
        "msg ViewShare 1 3\nendround 1\n");
    const bool plants_caught = !hop_plant.ok && !msg_plant.ok;
    std::snprintf(detail, sizeof(detail),
                  "%d messages and %d commits audited clean in %d dirty "
                  "trials of 30; planted 3-hop rewire and off-edge message "
                  "both flagged: %s",
                  messages, commits, dirty, plants_caught ? "yes" : "no");
    verdict(8, dirty == 0 && plants_caught);
  }

  // 9. line rounds grow with size, subquadratically, and match the frozen
  // scaling snapshot (recorded on the first validated run)
  {
    double mean[3] = {0.0, 0.0, 0.0};
    std::string observed;
    for (int i = 0; i < 3; ++i) {
      for (Protocol p : {Protocol::kLine, Protocol::kStar}) {
        const auto& trials = cell_trials(grid, kGridSizes[i], p);
        observed += protocol_name(p);
        observed += " n=" + std::to_string(kGridSizes[i]) + " rounds";
        for (const TrialResult& t : trials) {
          observed += " " + std::to_string(t.rounds);
          if (p == Protocol::kLine) {
            mean[i] += static_cast<double>(t.rounds) / kGridTrials;
          }
        }
        observed += "\n";
      }
    }
    const bool monotone = mean[0] <= mean[1] && mean[1] <= mean[2];
    const double ratio = mean[2] / mean[0];
    const bool scaling_ok = monotone && ratio < 16.0;

    const std::filesystem::path snap =
        std::filesystem::path(TREEMORPH_TEST_DATA_DIR) / "round_scaling.txt";
    std::string snap_note;
    bool snap_ok = false;
    const std::string frozen = read_file_or_empty(snap);
    if (frozen.empty()) {
      if (scaling_ok) {
        std::filesystem::create_directories(snap.parent_path());
        std::ofstream out(snap, std::ios::binary);
        out << observed;
        snap_ok = out.good();
        snap_note = "snapshot recorded";
      } else {
        snap_note = "snapshot withheld, scaling check failed";
      }
    } else {
      snap_ok = frozen == observed;
      snap_note = snap_ok ? "snapshot matched" : "snapshot DIVERGED";
    }
    std::snprintf(detail, sizeof(detail),
                  "line round means %.1f / %.1f / %.1f for n 15 / 30 / 60, "
                  "ratio %.1f (< 16), monotone: %s; %s",
                  mean[0], mean[1], mean[2], ratio, monotone ? "yes" : "no",
                  snap_note.c_str());
    verdict(9, scaling_ok && snap_ok);
  }

  // 10. per-round potentials: star retires a non-leaf on every committing
  // round; line sheds junction weight on every committing round
  {
    // prove the invariant checks are live in this binary first
    bool checks_live = false;
    try {
      std::vector<Edge> path_edges{{1, 2}, {2, 3}, {3, 4}};
      (void)treemorph::apply(LabeledTree::from_edges(4, path_edges),
                             Leafization{1, 3});
    } catch (const Error&) {
      checks_live = true;
    }

    int star_flat = 0;
    int line_flat = 0;
    int line_committing = 0;
    for (const Cell& c : grid) {
      for (const TrialResult& t : c.trials) {
        for (std::size_t i = 1; i < t.traces.size(); ++i) {
          if (t.traces[i].commits == 0) continue;
          if (c.protocol == Protocol::kStar) {
            if (t.traces[i].nonleaf_count >= t.traces[i - 1].nonleaf_count) {
              ++star_flat;
            }
          } else {
            ++line_committing;
            if (t.traces[i].junction_weight >=
                t.traces[i - 1].junction_weight) {
              ++line_flat;
            }
          }
        }
      }
    }
    std::snprintf(detail, sizeof(detail),
                  "invariant checks live: %s; star non-leaf count fell on "
                  "every committing round (%d flat); line junction weight "
                  "flat on %d of %d committing rounds",
                  checks_live ? "yes" : "no", star_flat, line_flat,
                  line_committing);
    verdict(10, checks_live && star_flat == 0 && line_flat == 0);
  }

  std::printf("acceptance: %d of 10 gates passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
