#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "treemorph/geometry.hpp"
#include "treemorph/ops.hpp"
#include "treemorph/protocol.hpp"
#include "treemorph/rng.hpp"
#include "treemorph/tree.hpp"

namespace treemorph {

struct RangeConfig {
  double r_range = 1.0;     // communication range (m)
  double r_mission = 0.8;   // nominal hold distance
  double r_transfer = 0.45; // per-hop approach distance, r_range/2 - delta
  double delta = 0.05;      // safety margin
  double v_max = 0.1;       // speed clamp (m/s)
  double dt = 0.05;         // integration step (s); v_max*dt <= 0.005*r_range

  void validate() const;  // throws BadRangeConfig
};

enum class Phase { kHold, kApproach, kArrange };
const char* phase_name(Phase p);

struct WorldState {
  std::vector<Vec2> positions;  // index v-1 holds node v
  LabeledTree tree;
  std::vector<Phase> phases;
  double time = 0.0;
  std::map<Edge, double> edge_targets;  // per-edge target; absent = r_mission

  double target_for(const Edge& e, const RangeConfig& cfg) const;
};

// Pairwise edge potential: quadratic well at the edge target plus a barrier
// that diverges at r_range, switched on at 0.95*r_range. Summed over tree
// edges.
double total_potential(const WorldState& world, const RangeConfig& cfg);

// One explicit-Euler step down the potential gradient, speed-clamped to
// v_max. Throws LinkStretch if any tree edge reaches r_range.
void control_step(WorldState& world, const RangeConfig& cfg);

// Same, with an extra per-robot velocity term (arrangement steering).
void control_step_with_push(WorldState& world, const RangeConfig& cfg,
                            std::span<const Vec2> extra_velocity);

// Area of the union of radius-r_range disks, counted on the global lattice
// with cell size r_range/50 (a cell counts when its center is covered).
double coverage_area(std::span<const Vec2> positions, const RangeConfig& cfg);

// Uniform positions in a square with side 0.5*sqrt(n)*r_range, resampled
// until the strict-< r_range proximity graph is connected.
std::vector<Vec2> sample_connected_world(int n, const RangeConfig& cfg,
                                         SplitMix64& rng);

// Uniform random spanning tree of the proximity graph (Wilson's algorithm).
LabeledTree random_spanning_tree(std::span<const Vec2> positions, double r_range,
                                 SplitMix64& rng);

struct TrajectorySample {
  double t = 0.0;
  int robot = 0;  // node label
  double x = 0.0;
  double y = 0.0;
  Phase phase = Phase::kHold;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  std::string to_csv() const;
};

struct SpatialLimits {
  int approach_timeout_steps = 200000;
  int arrange_timeout_steps = 2000000;
};

// Owns one simulated world and drives it through op execution and final
// arrangement. Deterministic; fails loudly on any feasibility breach.
class SpatialWorld {
 public:
  using Limits = SpatialLimits;

  // traj_stride: record a trajectory sample every that many steps (0 = off).
  SpatialWorld(std::vector<Vec2> positions, LabeledTree tree, RangeConfig cfg,
               int traj_stride = 0, Limits limits = Limits());

  // Plain holding flight at mission distances.
  void hold_steps(int steps);

  // Physically realizes one round's committed ops: participants approach
  // until every to-be-added edge is shorter than r_range - 2*delta, then all
  // rewires apply atomically. Ops already in range rewire with no motion.
  void execute_ops(const std::vector<OpLogEntry>& round_ops);
  void execute_op(const TopologyOp& op);

  // Line: interior robots steer to their neighbors' midpoint until every
  // adjacent-segment bend is below tolerance. Star: leaves equalize angular
  // gaps around the center at r_mission. Returns simulated seconds spent.
  double arrange(Protocol shape);

  const WorldState& world() const { return world_; }
  const RangeConfig& config() const { return cfg_; }
  const Trajectory& trajectory() const { return traj_; }
  long long steps_taken() const { return steps_; }
  void snapshot_now();

  // Largest bend over interior path nodes, degrees (0 = straight).
  double line_max_angle_deviation_deg() const;
  // Largest |gap - ideal| / ideal over adjacent leaf angles around the center.
  double star_max_gap_deviation_fraction() const;

 private:
  void step(std::span<const Vec2> extra);
  std::vector<NodeId> path_order() const;

  WorldState world_;
  RangeConfig cfg_;
  Limits limits_;
  int traj_stride_ = 0;
  long long steps_ = 0;
  Trajectory traj_;
};

}  // namespace treemorph
