#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "treemorph/metrics.hpp"
#include "treemorph/protocol.hpp"
#include "treemorph/spatial.hpp"

namespace treemorph {

// One experiment cell: n robots running one protocol for `trials` seeds.
struct ExperimentConfig {
  int n = 15;
  Protocol protocol = Protocol::kLine;
  std::uint64_t seed = 1;
  int trials = 5;
  RangeConfig ranges;
  int max_rounds = 0;  // 0 = 50*n
  std::string out_dir = "out";
  bool write_trajectory = true;
  bool write_event_log = true;
  int traj_stride = 200;  // control steps between trajectory samples
  SpatialWorld::Limits limits;

  int effective_max_rounds() const { return max_rounds > 0 ? max_rounds : 50 * n; }
  void validate() const;  // throws BadConfig
};

// JSON object with any subset of the config fields; unknown keys rejected.
ExperimentConfig parse_experiment_config(const std::string& json_text);

// Tree shape per round, for termination and spectral-trend checks.
struct RoundTrace {
  int round = 0;  // 0 = initial state, before any round
  int proposals = 0;
  int commits = 0;
  int junction_weight = 0;  // sum of max(deg - 2, 0) after this round
  int nonleaf_count = 0;    // nodes with degree > 1 after this round
  double lambda2_tree = 0.0;
};

struct TrialResult {
  int trial = 0;
  int n = 0;
  Protocol protocol = Protocol::kLine;

  bool converged = false;   // reached the zero-proposal fixed point in time
  bool goal_shape = false;  // final tree is a path (line) / star (star)
  int rounds = 0;           // rounds that carried at least one proposal
  std::string failure;      // empty unless the trial died mid-flight

  LabeledTree final_tree;
  std::vector<Vec2> final_positions;
  std::vector<RoundTrace> traces;  // index 0 = initial
  MetricSeries metrics;
  double coverage_initial = 0.0;
  double coverage_final = 0.0;
  double arrange_seconds = 0.0;
  AuditReport audit;
  std::string event_log;  // retained iff config.write_event_log
  Trajectory trajectory;  // sampled iff config.write_trajectory

  bool ok() const { return converged && goal_shape && audit.ok && failure.empty(); }
};

// Runs one seeded trial end to end: sample a connected world and a uniform
// spanning tree of its proximity graph, interleave protocol rounds with
// physical op execution, then arrange into the goal shape. The world draw
// depends only on (seed, n, trial_index) — not the protocol — so line and
// star trials with equal indices start from identical configurations.
TrialResult run_trial(const ExperimentConfig& config, int trial_index);

struct SweepConfig {
  std::vector<int> ns{15, 30, 60};
  std::vector<Protocol> protocols{Protocol::kLine, Protocol::kStar};
  ExperimentConfig base;  // seed/trials/ranges/limits/out_dir taken from here
};

SweepConfig parse_sweep_config(const std::string& json_text);

struct SweepCellSummary {
  int n = 0;
  Protocol protocol = Protocol::kLine;
  int trials = 0;
  double rounds_mean = 0.0;
  double rounds_stddev = 0.0;
  double arrange_seconds_mean = 0.0;
  double arrange_seconds_stddev = 0.0;
  double lambda2_mean = 0.0;
  double lambda2_stddev = 0.0;
  double coverage_mean = 0.0;
  double coverage_stddev = 0.0;
  bool all_ok = false;
};

struct SweepResult {
  std::vector<TrialResult> trials;  // cell-major, trial-minor order
  std::vector<SweepCellSummary> cells;

  bool all_ok() const;
  std::string summary_csv() const;
};

// Runs every (n, protocol) cell; trials execute in parallel, outputs are
// deterministic regardless of scheduling.
SweepResult run_sweep(const SweepConfig& config);

// CLI entry points. Exit codes: 0 success, 1 check failure (validation,
// convergence, audit), 2 usage error (callers map bad invocations there).
int cmd_run(const ExperimentConfig& config);
int cmd_plan(const std::string& initial_path, const std::string& target_path,
             const std::string& out_path);
int cmd_replay(const std::string& plan_path);
int cmd_audit(const std::string& log_path);
int cmd_sweep(const SweepConfig& config);

}  // namespace treemorph
