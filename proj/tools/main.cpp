#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "treemorph/experiment.hpp"

namespace {

using treemorph::Error;
using treemorph::ExperimentConfig;
using treemorph::SweepConfig;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(treemorph::ErrorCode::BadConfig, "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Flags shared by run and sweep; only flags the user actually passed override
// the config file.
struct CommonFlags {
  int n = 0;
  std::string protocol;
  std::uint64_t seed = 0;
  int trials = 0;
  int max_rounds = 0;
  std::string out;
  std::string config_path;

  CLI::Option* opt_n = nullptr;
  CLI::Option* opt_protocol = nullptr;
  CLI::Option* opt_seed = nullptr;
  CLI::Option* opt_trials = nullptr;
  CLI::Option* opt_max_rounds = nullptr;
  CLI::Option* opt_out = nullptr;

  void attach(CLI::App* cmd, bool with_n_protocol) {
    cmd->add_option("--config", config_path, "JSON config file");
    if (with_n_protocol) {
      opt_n = cmd->add_option("--n", n, "robot count");
      opt_protocol =
          cmd->add_option("--protocol", protocol, "goal shape: line or star");
    }
    opt_seed = cmd->add_option("--seed", seed, "base random seed");
    opt_trials = cmd->add_option("--trials", trials, "trials per cell");
    opt_max_rounds =
        cmd->add_option("--max-rounds", max_rounds, "round budget (0 = 50*n)");
    opt_out = cmd->add_option("--out", out, "output directory");
  }

  void apply(ExperimentConfig& cfg) const {
    if (opt_n && opt_n->count()) cfg.n = n;
    if (opt_protocol && opt_protocol->count()) {
      cfg.protocol = treemorph::parse_protocol(protocol);
    }
    if (opt_seed->count()) cfg.seed = seed;
    if (opt_trials->count()) cfg.trials = trials;
    if (opt_max_rounds->count()) cfg.max_rounds = max_rounds;
    if (opt_out->count()) cfg.out_dir = out;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spanning-tree topology engine for robot swarms"};
  app.require_subcommand(1);

  CLI::App* run = app.add_subcommand("run", "run one experiment cell");
  CommonFlags run_flags;
  run_flags.attach(run, /*with_n_protocol=*/true);

  CLI::App* plan = app.add_subcommand("plan", "plan a tree transformation");
  std::string plan_initial, plan_target, plan_out;
  plan->add_option("initial", plan_initial, "initial tree file")->required();
  plan->add_option("target", plan_target, "target tree file")->required();
  plan->add_option("out", plan_out, "plan output file")->required();

  CLI::App* replay = app.add_subcommand("replay", "replay and verify a plan");
  std::string replay_path;
  replay->add_option("plan", replay_path, "plan file")->required();

  CLI::App* audit = app.add_subcommand("audit", "locality-audit an event log");
  std::string audit_path;
  audit->add_option("log", audit_path, "event log file")->required();

  CLI::App* sweep = app.add_subcommand("sweep", "run the full size/shape grid");
  CommonFlags sweep_flags;
  sweep_flags.attach(sweep, /*with_n_protocol=*/false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (run->parsed()) {
      ExperimentConfig cfg;
      if (!run_flags.config_path.empty()) {
        cfg = treemorph::parse_experiment_config(slurp(run_flags.config_path));
      }
      run_flags.apply(cfg);
      return treemorph::cmd_run(cfg);
    }
    if (plan->parsed()) {
      return treemorph::cmd_plan(plan_initial, plan_target, plan_out);
    }
    if (replay->parsed()) {
      return treemorph::cmd_replay(replay_path);
    }
    if (audit->parsed()) {
      return treemorph::cmd_audit(audit_path);
    }
    if (sweep->parsed()) {
      SweepConfig cfg;
      if (!sweep_flags.config_path.empty()) {
        cfg = treemorph::parse_sweep_config(slurp(sweep_flags.config_path));
      }
      sweep_flags.apply(cfg.base);
      return treemorph::cmd_sweep(cfg);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    // Broken configs and unreadable config files are usage errors; anything
    // past argument handling reports 1 from the command itself.
    return 2;
  }
  return 2;
}
