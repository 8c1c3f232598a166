#include "treemorph/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <set>
#include <sstream>

#include <json.hpp>

#include "treemorph/planner.hpp"
#include "treemorph/svg.hpp"

namespace treemorph {

namespace {

using nlohmann::json;

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::BadConfig, "cannot open " + path.string() + " for writing");
  }
  out << text;
  if (!out) {
    throw Error(ErrorCode::BadConfig, "short write to " + path.string());
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::BadConfig, "cannot open " + path + " for reading");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json parse_json_object(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "config root must be an object");
  return j;
}

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const char* where) {
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      throw Error(ErrorCode::BadConfig,
                  std::string("unknown key \"") + item.key() + "\" in " + where);
    }
  }
}

void fill_config(ExperimentConfig& cfg, const json& j) {
  reject_unknown_keys(j, {"n", "protocol", "seed", "trials", "ranges", "max_rounds",
                          "out_dir", "write_trajectory", "write_event_log",
                          "traj_stride", "limits"},
                      "config");
  cfg.n = j.value("n", cfg.n);
  if (j.contains("protocol")) cfg.protocol = parse_protocol(j["protocol"].get<std::string>());
  cfg.seed = j.value("seed", cfg.seed);
  cfg.trials = j.value("trials", cfg.trials);
  cfg.max_rounds = j.value("max_rounds", cfg.max_rounds);
  cfg.out_dir = j.value("out_dir", cfg.out_dir);
  cfg.write_trajectory = j.value("write_trajectory", cfg.write_trajectory);
  cfg.write_event_log = j.value("write_event_log", cfg.write_event_log);
  cfg.traj_stride = j.value("traj_stride", cfg.traj_stride);
  if (j.contains("ranges")) {
    const json& r = j["ranges"];
    reject_unknown_keys(r, {"r_range", "r_mission", "r_transfer", "delta", "v_max", "dt"},
                        "ranges");
    cfg.ranges.r_range = r.value("r_range", cfg.ranges.r_range);
    cfg.ranges.r_mission = r.value("r_mission", cfg.ranges.r_mission);
    cfg.ranges.r_transfer = r.value("r_transfer", cfg.ranges.r_transfer);
    cfg.ranges.delta = r.value("delta", cfg.ranges.delta);
    cfg.ranges.v_max = r.value("v_max", cfg.ranges.v_max);
    cfg.ranges.dt = r.value("dt", cfg.ranges.dt);
  }
  if (j.contains("limits")) {
    const json& l = j["limits"];
    reject_unknown_keys(l, {"approach_timeout_steps", "arrange_timeout_steps"}, "limits");
    cfg.limits.approach_timeout_steps =
        l.value("approach_timeout_steps", cfg.limits.approach_timeout_steps);
    cfg.limits.arrange_timeout_steps =
        l.value("arrange_timeout_steps", cfg.limits.arrange_timeout_steps);
  }
}

int junction_weight_of(const LabeledTree& tree) {
  int sum = 0;
  for (NodeId v = 1; v <= tree.node_count(); ++v) {
    sum += std::max(tree.degree(v) - 2, 0);
  }
  return sum;
}

int nonleaf_count_of(const LabeledTree& tree) {
  int count = 0;
  for (NodeId v = 1; v <= tree.node_count(); ++v) {
    if (tree.degree(v) > 1) ++count;
  }
  return count;
}

MetricRow measure(const SpatialWorld& world, int round, int ops_committed) {
  const WorldState& w = world.world();
  const DegreeHistogram h = DegreeHistogram::of(w.tree);
  MetricRow row;
  row.time = w.time;
  row.round = round;
  row.lambda2_tree = lambda2_of_tree(w.tree);
  row.lambda2_graph =
      lambda2_of_proximity_graph(w.positions, world.config().r_range);
  row.coverage = coverage_area(w.positions, world.config());
  row.deg1_count = h.deg1;
  row.deg2_count = h.deg2;
  row.deg_ge2_count = h.deg_ge2;
  row.ops_committed = ops_committed;
  return row;
}

RoundTrace trace_of(const LabeledTree& tree, int round, int proposals, int commits) {
  RoundTrace t;
  t.round = round;
  t.proposals = proposals;
  t.commits = commits;
  t.junction_weight = junction_weight_of(tree);
  t.nonleaf_count = nonleaf_count_of(tree);
  t.lambda2_tree = lambda2_of_tree(tree);
  return t;
}

std::string artifact_name(const char* kind, const TrialResult& t, const char* ext) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%s_%s_n%d_t%d.%s", kind,
                protocol_name(t.protocol), t.n, t.trial, ext);
  return buf;
}

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

double stddev_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

}  // namespace

void ExperimentConfig::validate() const {
  if (n < 2) throw Error(ErrorCode::BadConfig, "n must be at least 2");
  if (trials < 1) throw Error(ErrorCode::BadConfig, "trials must be at least 1");
  if (max_rounds < 0) throw Error(ErrorCode::BadConfig, "max_rounds must be >= 0");
  if (traj_stride < 0) throw Error(ErrorCode::BadConfig, "traj_stride must be >= 0");
  ranges.validate();
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  ExperimentConfig cfg;
  fill_config(cfg, parse_json_object(json_text));
  cfg.validate();
  return cfg;
}

SweepConfig parse_sweep_config(const std::string& json_text) {
  json j = parse_json_object(json_text);
  SweepConfig sweep;
  if (j.contains("ns")) {
    sweep.ns = j["ns"].get<std::vector<int>>();
    j.erase("ns");
  }
  if (j.contains("protocols")) {
    sweep.protocols.clear();
    for (const auto& name : j["protocols"]) {
      sweep.protocols.push_back(parse_protocol(name.get<std::string>()));
    }
    j.erase("protocols");
  }
  fill_config(sweep.base, j);
  if (sweep.ns.empty() || sweep.protocols.empty()) {
    throw Error(ErrorCode::BadConfig, "sweep needs at least one n and one protocol");
  }
  for (int n : sweep.ns) {
    if (n < 2) throw Error(ErrorCode::BadConfig, "sweep n must be at least 2");
  }
  return sweep;
}

TrialResult run_trial(const ExperimentConfig& config, int trial_index) {
  config.validate();

  TrialResult result;
  result.trial = trial_index;
  result.n = config.n;
  result.protocol = config.protocol;

  // World draw keyed by (seed, n, trial) only, so the two protocols see the
  // same starting configuration for a given trial index.
  const std::uint64_t world_seed =
      mix_seed(mix_seed(config.seed, static_cast<std::uint64_t>(config.n)),
               static_cast<std::uint64_t>(trial_index));
  const std::uint64_t engine_seed =
      mix_seed(world_seed, config.protocol == Protocol::kLine ? 0x11AEull : 0x57A5ull);

  SplitMix64 world_rng(world_seed);
  std::vector<Vec2> positions = sample_connected_world(config.n, config.ranges, world_rng);
  LabeledTree initial =
      random_spanning_tree(positions, config.ranges.r_range, world_rng);

  SpatialWorld world(std::move(positions), initial, config.ranges,
                     config.write_trajectory ? config.traj_stride : 0,
                     config.limits);
  ProtocolEngine engine(initial, config.protocol, engine_seed);

  result.coverage_initial = coverage_area(world.world().positions, config.ranges);
  result.traces.push_back(trace_of(initial, 0, 0, 0));
  result.metrics.rows.push_back(measure(world, 0, 0));

  const int round_budget = config.effective_max_rounds();
  try {
    for (int r = 1; r <= round_budget && !engine.at_fixed_point(); ++r) {
      const RoundOutcome outcome = engine.step_round();
      if (engine.at_fixed_point()) break;  // detection round: nothing happened
      ++result.rounds;
      if (!outcome.committed.empty()) {
        world.execute_ops(outcome.committed);
      }
      if (!(world.world().tree == engine.tree())) {
        throw Error(ErrorCode::TreeInvariantBroken,
                    "engine and world disagree about the tree");
      }
      result.traces.push_back(trace_of(engine.tree(), outcome.round,
                                       outcome.proposals,
                                       static_cast<int>(outcome.committed.size())));
      result.metrics.rows.push_back(measure(
          world, outcome.round, static_cast<int>(outcome.committed.size())));
    }
    result.converged = engine.at_fixed_point();

    result.goal_shape = config.protocol == Protocol::kLine
                            ? is_path_tree(engine.tree())
                            : is_star_tree(engine.tree());

    if (result.converged && result.goal_shape) {
      result.arrange_seconds = world.arrange(config.protocol);
      result.metrics.rows.push_back(measure(world, engine.rounds_run(), 0));
    }
  } catch (const Error& e) {
    result.failure = e.what();
  }

  result.final_tree = engine.tree();
  result.final_positions = world.world().positions;
  result.coverage_final = coverage_area(world.world().positions, config.ranges);
  result.event_log = engine.log_text();
  result.audit = locality_audit(result.event_log);
  if (!config.write_event_log) result.event_log.clear();
  if (config.write_trajectory) result.trajectory = world.trajectory();
  return result;
}

bool SweepResult::all_ok() const {
  return std::all_of(trials.begin(), trials.end(),
                     [](const TrialResult& t) { return t.ok(); });
}

std::string SweepResult::summary_csv() const {
  std::string out =
      "n,protocol,trials,rounds_mean,rounds_stddev,arrange_seconds_mean,"
      "arrange_seconds_stddev,lambda2_mean,lambda2_stddev,coverage_mean,"
      "coverage_stddev,all_ok\n";
  char buf[320];
  for (const SweepCellSummary& c : cells) {
    std::snprintf(buf, sizeof(buf),
                  "%d,%s,%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%d\n", c.n,
                  protocol_name(c.protocol), c.trials, c.rounds_mean,
                  c.rounds_stddev, c.arrange_seconds_mean,
                  c.arrange_seconds_stddev, c.lambda2_mean, c.lambda2_stddev,
                  c.coverage_mean, c.coverage_stddev, c.all_ok ? 1 : 0);
    out += buf;
  }
  return out;
}

SweepResult run_sweep(const SweepConfig& config) {
  config.base.validate();

  struct Cell {
    ExperimentConfig cfg;
    std::vector<std::future<TrialResult>> futures;
  };
  std::vector<Cell> cells;
  for (int n : config.ns) {
    for (Protocol p : config.protocols) {
      Cell cell;
      cell.cfg = config.base;
      cell.cfg.n = n;
      cell.cfg.protocol = p;
      cell.cfg.write_trajectory = false;  // sweeps keep artifacts lean
      for (int t = 0; t < cell.cfg.trials; ++t) {
        cell.futures.push_back(std::async(
            std::launch::async,
            [cfg = cell.cfg, t] { return run_trial(cfg, t); }));
      }
      cells.push_back(std::move(cell));
    }
  }

  SweepResult result;
  for (Cell& cell : cells) {
    std::vector<double> rounds, arrange, lambda2, coverage;
    bool cell_ok = true;
    for (auto& f : cell.futures) {
      TrialResult t = f.get();
      rounds.push_back(static_cast<double>(t.rounds));
      arrange.push_back(t.arrange_seconds);
      lambda2.push_back(lambda2_of_tree(t.final_tree));
      coverage.push_back(t.coverage_final);
      cell_ok = cell_ok && t.ok();
      result.trials.push_back(std::move(t));
    }
    SweepCellSummary s;
    s.n = cell.cfg.n;
    s.protocol = cell.cfg.protocol;
    s.trials = cell.cfg.trials;
    s.rounds_mean = mean_of(rounds);
    s.rounds_stddev = stddev_of(rounds);
    s.arrange_seconds_mean = mean_of(arrange);
    s.arrange_seconds_stddev = stddev_of(arrange);
    s.lambda2_mean = mean_of(lambda2);
    s.lambda2_stddev = stddev_of(lambda2);
    s.coverage_mean = mean_of(coverage);
    s.coverage_stddev = stddev_of(coverage);
    s.all_ok = cell_ok;
    result.cells.push_back(s);
  }
  return result;
}

int cmd_run(const ExperimentConfig& config) {
  try {
    config.validate();
  } catch (const Error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  }
  bool all_ok = true;
  try {
    const std::filesystem::path dir(config.out_dir);
    std::filesystem::create_directories(dir);
    for (int t = 0; t < config.trials; ++t) {
      TrialResult trial = run_trial(config, t);
      write_text_file(dir / artifact_name("metrics", trial, "csv"),
                      trial.metrics.to_csv());
      if (config.write_trajectory) {
        write_text_file(dir / artifact_name("trajectory", trial, "csv"),
                        trial.trajectory.to_csv());
        WorldState final_world;
        final_world.positions = trial.final_positions;
        final_world.tree = trial.final_tree;
        write_text_file(dir / artifact_name("flight", trial, "svg"),
                        render_world_svg(trial.trajectory, final_world,
                                         config.ranges));
      }
      if (config.write_event_log) {
        write_text_file(dir / artifact_name("events", trial, "log"),
                        trial.event_log);
      }
      std::printf("trial %d: rounds=%d converged=%s shape=%s arrange=%.1fs "
                  "coverage=%.3f audit=%s%s%s\n",
                  t, trial.rounds, trial.converged ? "yes" : "no",
                  trial.goal_shape ? "ok" : "NO", trial.arrange_seconds,
                  trial.coverage_final, trial.audit.ok ? "clean" : "VIOLATIONS",
                  trial.failure.empty() ? "" : " failure=",
                  trial.failure.c_str());
      all_ok = all_ok && trial.ok();
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  }
  return all_ok ? 0 : 1;
}

int cmd_plan(const std::string& initial_path, const std::string& target_path,
             const std::string& out_path) {
  try {
    const LabeledTree initial = parse_tree_text(read_text_file(initial_path));
    const LabeledTree target = parse_tree_text(read_text_file(target_path));
    const TransformPlan plan = plan_transform(initial, target);
    write_text_file(out_path, format_plan(plan));
    std::printf("steps: %d\n", static_cast<int>(plan.steps.size()));
    return 0;
  } catch (const Error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  }
}

int cmd_replay(const std::string& plan_path) {
  try {
    const TransformPlan plan = parse_plan(read_text_file(plan_path));
    const ReplayResult replayed = replay(plan);
    if (!(replayed.final_tree == plan.target)) {
      std::fprintf(stderr, "replay finished on a tree that is not the target\n");
      return 1;
    }
    std::printf("replayed %d steps, final tree matches target\n",
                static_cast<int>(plan.steps.size()));
    return 0;
  } catch (const Error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  }
}

int cmd_audit(const std::string& log_path) {
  try {
    const AuditReport report = locality_audit(read_text_file(log_path));
    for (const AuditViolation& v : report.violations) {
      std::printf("line %d: %s\n", v.line_no, v.reason.c_str());
    }
    std::printf("audit: %d messages, %d commits, %d violations\n",
                report.messages_checked, report.commits_checked,
                static_cast<int>(report.violations.size()));
    return report.ok ? 0 : 1;
  } catch (const Error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  }
}

int cmd_sweep(const SweepConfig& config) {
  try {
    const SweepResult result = run_sweep(config);
    const std::filesystem::path dir(config.base.out_dir);
    std::filesystem::create_directories(dir);
    for (const TrialResult& t : result.trials) {
      write_text_file(dir / artifact_name("metrics", t, "csv"), t.metrics.to_csv());
      if (config.base.write_event_log) {
        write_text_file(dir / artifact_name("events", t, "log"), t.event_log);
      }
    }
    const std::string summary = result.summary_csv();
    write_text_file(dir / "summary.csv", summary);
    std::fputs(summary.c_str(), stdout);
    return result.all_ok() ? 0 : 1;
  } catch (const Error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  }
}

}  // namespace treemorph
