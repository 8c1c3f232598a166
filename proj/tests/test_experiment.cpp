#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "treemorph/experiment.hpp"
#include "treemorph/planner.hpp"

using namespace treemorph;

namespace {

std::filesystem::path temp_dir(const char* tag) {
  const auto dir = std::filesystem::temp_directory_path() /
                   (std::string("treemorph_test_") + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

ExperimentConfig small_config(int n, Protocol protocol, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.n = n;
  cfg.protocol = protocol;
  cfg.seed = seed;
  cfg.trials = 1;
  return cfg;
}

}  // namespace

TEST_CASE("experiment config parses json and rejects junk") {
  const ExperimentConfig cfg = parse_experiment_config(R"({
    "n": 12,
    "protocol": "star",
    "seed": 42,
    "trials": 3,
    "max_rounds": 100,
    "out_dir": "elsewhere",
    "write_trajectory": false,
    "traj_stride": 50,
    "ranges": {"r_range": 2.0, "r_mission": 1.6, "r_transfer": 0.9,
               "delta": 0.1, "v_max": 0.2, "dt": 0.05},
    "limits": {"approach_timeout_steps": 1000}
  })");
  CHECK(cfg.n == 12);
  CHECK(cfg.protocol == Protocol::kStar);
  CHECK(cfg.seed == 42);
  CHECK(cfg.trials == 3);
  CHECK(cfg.max_rounds == 100);
  CHECK(cfg.out_dir == "elsewhere");
  CHECK_FALSE(cfg.write_trajectory);
  CHECK(cfg.traj_stride == 50);
  CHECK(cfg.ranges.r_range == doctest::Approx(2.0));
  CHECK(cfg.limits.approach_timeout_steps == 1000);
  CHECK(cfg.effective_max_rounds() == 100);

  const ExperimentConfig defaults = parse_experiment_config("{}");
  CHECK(defaults.n == 15);
  CHECK(defaults.effective_max_rounds() == 50 * 15);

  CHECK_THROWS_AS(parse_experiment_config("{nope"), Error);
  CHECK_THROWS_AS(parse_experiment_config(R"({"robots": 5})"), Error);
  CHECK_THROWS_AS(parse_experiment_config(R"({"n": 1})"), Error);
  CHECK_THROWS_AS(parse_experiment_config(R"({"protocol": "blob"})"), Error);
}

TEST_CASE("sweep config defaults to the full grid") {
  const SweepConfig grid = parse_sweep_config("{}");
  CHECK(grid.ns == std::vector<int>{15, 30, 60});
  CHECK(grid.protocols.size() == 2);

  const SweepConfig tiny = parse_sweep_config(R"({
    "ns": [5, 8],
    "protocols": ["star"],
    "seed": 7,
    "trials": 2
  })");
  CHECK(tiny.ns == std::vector<int>{5, 8});
  CHECK(tiny.protocols == std::vector<Protocol>{Protocol::kStar});
  CHECK(tiny.base.seed == 7);
  CHECK(tiny.base.trials == 2);

  CHECK_THROWS_AS(parse_sweep_config(R"({"ns": []})"), Error);
  CHECK_THROWS_AS(parse_sweep_config(R"({"ns": [1]})"), Error);
}

TEST_CASE("a small line trial runs to a path with clean audits") {
  const TrialResult r = run_trial(small_config(8, Protocol::kLine, 5), 0);
  CHECK(r.ok());
  CHECK(r.converged);
  CHECK(r.goal_shape);
  CHECK(r.failure.empty());
  CHECK(r.rounds <= 50 * 8);
  CHECK(is_path_tree(r.final_tree));
  CHECK(r.audit.ok);
  CHECK(r.audit.messages_checked > 0);
  CHECK_FALSE(r.event_log.empty());
  CHECK_FALSE(r.trajectory.samples.empty());
  CHECK(r.coverage_initial > 0.0);
  CHECK(r.coverage_final > 0.0);
  CHECK(r.arrange_seconds >= 0.0);

  REQUIRE_FALSE(r.traces.empty());
  CHECK(r.traces.front().round == 0);
  CHECK(static_cast<int>(r.traces.size()) == r.rounds + 1);
  // one metric row per trace plus the post-arrangement row
  CHECK(r.metrics.rows.size() == r.traces.size() + 1);
  const RoundTrace& last = r.traces.back();
  CHECK(last.junction_weight == 0);
  CHECK(last.lambda2_tree == doctest::Approx(lambda2_path_closed_form(8)).epsilon(1e-9));
}

TEST_CASE("a small star trial centralizes") {
  const TrialResult r = run_trial(small_config(9, Protocol::kStar, 6), 0);
  CHECK(r.ok());
  CHECK(is_star_tree(r.final_tree));
  CHECK(r.traces.back().nonleaf_count <= 1);
  CHECK(r.traces.back().lambda2_tree == doctest::Approx(1.0).epsilon(1e-9));
  // non-leaf count never grows along the run
  for (std::size_t i = 1; i < r.traces.size(); ++i) {
    CHECK(r.traces[i].nonleaf_count <= r.traces[i - 1].nonleaf_count);
  }
}

TEST_CASE("trials are deterministic byte for byte") {
  const ExperimentConfig cfg = small_config(10, Protocol::kLine, 21);
  const TrialResult a = run_trial(cfg, 0);
  const TrialResult b = run_trial(cfg, 0);
  CHECK(a.metrics.to_csv() == b.metrics.to_csv());
  CHECK(a.trajectory.to_csv() == b.trajectory.to_csv());
  CHECK(a.event_log == b.event_log);
  CHECK(a.final_tree == b.final_tree);
}

TEST_CASE("both protocols start a trial from the same world") {
  const ExperimentConfig line_cfg = small_config(10, Protocol::kLine, 33);
  ExperimentConfig star_cfg = line_cfg;
  star_cfg.protocol = Protocol::kStar;
  const TrialResult line = run_trial(line_cfg, 2);
  const TrialResult star = run_trial(star_cfg, 2);
  REQUIRE(line.trajectory.samples.size() >= 10u);
  REQUIRE(star.trajectory.samples.size() >= 10u);
  for (int i = 0; i < 10; ++i) {
    CHECK(line.trajectory.samples[i].t == 0.0);
    CHECK(line.trajectory.samples[i].x == star.trajectory.samples[i].x);
    CHECK(line.trajectory.samples[i].y == star.trajectory.samples[i].y);
  }
}

TEST_CASE("different trial indices draw different worlds") {
  const ExperimentConfig cfg = small_config(10, Protocol::kLine, 33);
  const TrialResult t0 = run_trial(cfg, 0);
  const TrialResult t1 = run_trial(cfg, 1);
  bool same = true;
  for (int i = 0; i < 10; ++i) {
    same = same && t0.trajectory.samples[i].x == t1.trajectory.samples[i].x;
  }
  CHECK_FALSE(same);
}

TEST_CASE("sweeps aggregate per cell in grid order") {
  SweepConfig grid;
  grid.ns = {5, 7};
  grid.protocols = {Protocol::kLine, Protocol::kStar};
  grid.base.seed = 11;
  grid.base.trials = 2;
  grid.base.write_trajectory = true;  // forced off inside sweeps

  const SweepResult result = run_sweep(grid);
  CHECK(result.all_ok());
  REQUIRE(result.cells.size() == 4);
  REQUIRE(result.trials.size() == 8);
  CHECK(result.cells[0].n == 5);
  CHECK(result.cells[0].protocol == Protocol::kLine);
  CHECK(result.cells[1].protocol == Protocol::kStar);
  CHECK(result.cells[2].n == 7);
  CHECK(result.trials[0].n == 5);
  CHECK(result.trials[2].protocol == Protocol::kStar);
  for (const TrialResult& t : result.trials) {
    CHECK(t.ok());
    CHECK(t.trajectory.samples.empty());
  }
  // star cells sit at the star spectrum no matter the size
  CHECK(result.cells[1].lambda2_mean == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(result.cells[3].lambda2_mean == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(result.cells[1].lambda2_stddev < 1e-9);

  const std::string csv = result.summary_csv();
  CHECK(csv.rfind("n,protocol,trials,rounds_mean,rounds_stddev,"
                  "arrange_seconds_mean,arrange_seconds_stddev,"
                  "lambda2_mean,lambda2_stddev,"
                  "coverage_mean,coverage_stddev,all_ok\n",
                  0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}

TEST_CASE("sweep runs are schedule independent") {
  SweepConfig grid;
  grid.ns = {6};
  grid.protocols = {Protocol::kLine, Protocol::kStar};
  grid.base.seed = 13;
  grid.base.trials = 3;
  const std::string a = run_sweep(grid).summary_csv();
  const std::string b = run_sweep(grid).summary_csv();
  CHECK(a == b);
}

TEST_CASE("plan and audit commands round through files") {
  const auto dir = temp_dir("cmd");
  const LabeledTree star = LabeledTree::from_edges(
      6, {{1, 2}, {1, 3}, {1, 4}, {1, 5}, {1, 6}});
  std::vector<Edge> path_edges;
  for (int v = 1; v < 6; ++v) path_edges.push_back({v, v + 1});
  const LabeledTree path = LabeledTree::from_edges(6, path_edges);

  write_file(dir / "star.txt", format_tree_text(star));
  write_file(dir / "path.txt", format_tree_text(path));

  const std::string plan_path = (dir / "out.plan").string();
  CHECK(cmd_plan((dir / "star.txt").string(), (dir / "path.txt").string(),
                 plan_path) == 0);
  std::ifstream in(plan_path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  const TransformPlan plan = parse_plan(text);
  CHECK(replay(plan).final_tree == path);
  CHECK(cmd_replay(plan_path) == 0);

  // identity plan has zero steps
  const std::string id_path = (dir / "id.plan").string();
  CHECK(cmd_plan((dir / "star.txt").string(), (dir / "star.txt").string(),
                 id_path) == 0);
  std::ifstream id_in(id_path);
  std::string id_text((std::istreambuf_iterator<char>(id_in)),
                      std::istreambuf_iterator<char>());
  CHECK(parse_plan(id_text).steps.empty());

  // size mismatch is a failing command
  write_file(dir / "small.txt", "n=3\n1 2\n2 3\n");
  CHECK(cmd_plan((dir / "star.txt").string(), (dir / "small.txt").string(),
                 (dir / "bad.plan").string()) != 0);

  // audit: clean log passes, forged log fails
  write_file(dir / "clean.log",
             "tree n=3\nedge 1 2\nedge 2 3\nround 1\nmsg ViewShare 1 2\n"
             "endround 1\n");
  CHECK(cmd_audit((dir / "clean.log").string()) == 0);
  write_file(dir / "bad.log",
             "tree n=5\nedge 1 2\nedge 2 3\nedge 3 4\nedge 4 5\nround 1\n"
             "commit LT 5 4 3 | -(4,5) | +(1,5) | cert 1-5:1,2,3,4,5\n"
             "endround 1\n");
  CHECK(cmd_audit((dir / "bad.log").string()) == 1);
  CHECK(cmd_audit((dir / "missing.log").string()) != 0);

  std::filesystem::remove_all(dir);
}
