#include "treemorph/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "treemorph/metrics.hpp"

namespace treemorph {

namespace {

constexpr double kBarrierStartFraction = 0.95;  // of r_range
constexpr double kBarrierGain = 1e-4;
constexpr double kMidpointGain = 1.0;    // line straightening pull (1/s)
constexpr double kAngularGain = 0.25;    // star gap equalization (1/s)
constexpr double kLineDoneDeg = 1.5;     // internal stop, tighter than checks
constexpr double kStarDoneFraction = 0.035;
constexpr int kArrangeCheckEvery = 25;

double barrier_value(double d, double r_range) {
  const double start = kBarrierStartFraction * r_range;
  if (d <= start) return 0.0;
  const double inv = 1.0 / (r_range - d) - 1.0 / (r_range - start);
  return kBarrierGain * inv * inv;
}

// d/dd of barrier_value
double barrier_slope(double d, double r_range) {
  const double start = kBarrierStartFraction * r_range;
  if (d <= start) return 0.0;
  const double inv = 1.0 / (r_range - d) - 1.0 / (r_range - start);
  const double gap = r_range - d;
  return 2.0 * kBarrierGain * inv / (gap * gap);
}

NodeId center_of(const LabeledTree& tree) {
  const NodeId c = star_center(tree);
  if (c == 0) {
    throw Error(ErrorCode::WrongAttachment, "tree has no star center");
  }
  return c;
}

}  // namespace

void RangeConfig::validate() const {
  const bool shape_ok = 0.0 < r_transfer &&
                        r_transfer <= r_range / 2.0 - delta &&
                        r_range / 2.0 - delta < r_mission &&
                        r_mission <= r_range && delta > 0.0;
  if (!shape_ok) {
    throw Error(ErrorCode::BadRangeConfig,
                "need 0 < r_transfer <= r_range/2 - delta < r_mission <= r_range");
  }
  if (!(v_max > 0.0) || !(dt > 0.0)) {
    throw Error(ErrorCode::BadRangeConfig, "v_max and dt must be positive");
  }
  if (v_max * dt > 0.005 * r_range + 1e-12) {
    throw Error(ErrorCode::BadRangeConfig,
                "per-step displacement v_max*dt must not exceed 0.005*r_range");
  }
}

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::kHold: return "hold";
    case Phase::kApproach: return "approach";
    case Phase::kArrange: return "arrange";
  }
  return "?";
}

double WorldState::target_for(const Edge& e, const RangeConfig& cfg) const {
  auto it = edge_targets.find(e);
  return it == edge_targets.end() ? cfg.r_mission : it->second;
}

double total_potential(const WorldState& world, const RangeConfig& cfg) {
  double sum = 0.0;
  for (const Edge& e : world.tree.edges()) {
    const double d = distance(world.positions[e.a - 1], world.positions[e.b - 1]);
    const double miss = d - world.target_for(e, cfg);
    sum += miss * miss + barrier_value(d, cfg.r_range);
  }
  return sum;
}

void control_step_with_push(WorldState& world, const RangeConfig& cfg,
                            std::span<const Vec2> extra_velocity) {
  const int n = world.tree.node_count();
  std::vector<Vec2> velocity(static_cast<std::size_t>(n));
  for (const Edge& e : world.tree.edges()) {
    const Vec2& pa = world.positions[e.a - 1];
    const Vec2& pb = world.positions[e.b - 1];
    const double d = distance(pa, pb);
    if (d < 1e-12) continue;  // coincident: direction undefined, no force
    const double slope =
        2.0 * (d - world.target_for(e, cfg)) + barrier_slope(d, cfg.r_range);
    // Unit vector from a toward b, scaled by the descent rate.
    const Vec2 dir{(pb.x - pa.x) / d, (pb.y - pa.y) / d};
    velocity[e.a - 1] += dir * slope;
    velocity[e.b - 1] += dir * (-slope);
  }
  for (int i = 0; i < n; ++i) {
    if (!extra_velocity.empty()) velocity[i] += extra_velocity[i];
    const double speed = velocity[i].norm();
    if (speed > cfg.v_max) velocity[i] = velocity[i] * (cfg.v_max / speed);
    world.positions[i] += velocity[i] * cfg.dt;
  }
  world.time += cfg.dt;
  for (const Edge& e : world.tree.edges()) {
    const double d = distance(world.positions[e.a - 1], world.positions[e.b - 1]);
    if (d >= cfg.r_range) {
      char buf[128];
      std::snprintf(buf, sizeof(buf), "edge (%d,%d) reached %.6f m", e.a, e.b, d);
      throw Error(ErrorCode::LinkStretch, buf);
    }
  }
}

void control_step(WorldState& world, const RangeConfig& cfg) {
  control_step_with_push(world, cfg, {});
}

double coverage_area(std::span<const Vec2> positions, const RangeConfig& cfg) {
  if (positions.empty()) return 0.0;
  const double cell = cfg.r_range / 50.0;
  const double r2 = cfg.r_range * cfg.r_range;

  long long min_ix = 0, max_ix = 0, min_iy = 0, max_iy = 0;
  bool first = true;
  auto cell_range = [&](double lo, double hi) {
    return std::pair<long long, long long>{
        static_cast<long long>(std::floor(lo / cell)),
        static_cast<long long>(std::floor(hi / cell))};
  };
  for (const Vec2& p : positions) {
    auto [x0, x1] = cell_range(p.x - cfg.r_range, p.x + cfg.r_range);
    auto [y0, y1] = cell_range(p.y - cfg.r_range, p.y + cfg.r_range);
    if (first || x0 < min_ix) min_ix = x0;
    if (first || x1 > max_ix) max_ix = x1;
    if (first || y0 < min_iy) min_iy = y0;
    if (first || y1 > max_iy) max_iy = y1;
    first = false;
  }
  const long long w = max_ix - min_ix + 1;
  const long long h = max_iy - min_iy + 1;
  std::vector<char> covered(static_cast<std::size_t>(w * h), 0);

  long long count = 0;
  for (const Vec2& p : positions) {
    auto [x0, x1] = cell_range(p.x - cfg.r_range, p.x + cfg.r_range);
    auto [y0, y1] = cell_range(p.y - cfg.r_range, p.y + cfg.r_range);
    for (long long ix = x0; ix <= x1; ++ix) {
      const double cx = (ix + 0.5) * cell;
      for (long long iy = y0; iy <= y1; ++iy) {
        const double cy = (iy + 0.5) * cell;
        const double dx = cx - p.x, dy = cy - p.y;
        if (dx * dx + dy * dy > r2) continue;
        char& slot = covered[static_cast<std::size_t>((ix - min_ix) * h + (iy - min_iy))];
        if (!slot) {
          slot = 1;
          ++count;
        }
      }
    }
  }
  return static_cast<double>(count) * cell * cell;
}

std::vector<Vec2> sample_connected_world(int n, const RangeConfig& cfg,
                                         SplitMix64& rng) {
  if (n < 2) throw Error(ErrorCode::InvalidNodeCount, "need n >= 2");
  const double side = 0.5 * std::sqrt(static_cast<double>(n)) * cfg.r_range;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<Vec2> pts(static_cast<std::size_t>(n));
    for (Vec2& p : pts) {
      p.x = rng.next_unit() * side;
      p.y = rng.next_unit() * side;
    }
    // connectivity of the strict proximity graph
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int reached = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v = 0; v < n; ++v) {
        if (seen[v] || distance(pts[u], pts[v]) >= cfg.r_range) continue;
        seen[v] = 1;
        ++reached;
        stack.push_back(v);
      }
    }
    if (reached == n) return pts;
  }
  throw Error(ErrorCode::WorldSampleFailed,
              "no connected placement found in 1000 attempts");
}

LabeledTree random_spanning_tree(std::span<const Vec2> positions, double r_range,
                                 SplitMix64& rng) {
  const int n = static_cast<int>(positions.size());
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (distance(positions[i], positions[j]) < r_range) {
        adj[i].push_back(j);
        adj[j].push_back(i);
      }
    }
  }
  // Wilson's loop-erased walk: uniform over spanning trees given connectivity.
  std::vector<char> in_tree(static_cast<std::size_t>(n), 0);
  std::vector<int> next(static_cast<std::size_t>(n), -1);
  in_tree[0] = 1;
  std::vector<Edge> edges;
  for (int start = 1; start < n; ++start) {
    int u = start;
    while (!in_tree[u]) {
      if (adj[u].empty()) {
        throw Error(ErrorCode::Disconnected, "isolated robot in proximity graph");
      }
      next[u] = adj[u][rng.next_below(adj[u].size())];
      u = next[u];
    }
    u = start;
    while (!in_tree[u]) {
      in_tree[u] = 1;
      edges.push_back(make_edge(u + 1, next[u] + 1));
      u = next[u];
    }
  }
  return LabeledTree::from_edges(n, std::move(edges));
}

std::string Trajectory::to_csv() const {
  std::string out = "t,robot,x,y,phase\n";
  char buf[160];
  for (const TrajectorySample& s : samples) {
    std::snprintf(buf, sizeof(buf), "%.9g,%d,%.9g,%.9g,%s\n", s.t, s.robot, s.x,
                  s.y, phase_name(s.phase));
    out += buf;
  }
  return out;
}

SpatialWorld::SpatialWorld(std::vector<Vec2> positions, LabeledTree tree,
                           RangeConfig cfg, int traj_stride, Limits limits)
    : cfg_(cfg), limits_(limits), traj_stride_(traj_stride) {
  cfg_.validate();
  if (static_cast<int>(positions.size()) != tree.node_count()) {
    throw Error(ErrorCode::SizeMismatch, "positions vs tree node count");
  }
  world_.positions = std::move(positions);
  world_.tree = std::move(tree);
  world_.phases.assign(world_.positions.size(), Phase::kHold);
  for (const Edge& e : world_.tree.edges()) {
    const double d = distance(world_.positions[e.a - 1], world_.positions[e.b - 1]);
    if (d >= cfg_.r_range) {
      throw Error(ErrorCode::LinkStretch, "initial edge at or beyond r_range");
    }
  }
  snapshot_now();
}

void SpatialWorld::snapshot_now() {
  for (int i = 0; i < static_cast<int>(world_.positions.size()); ++i) {
    traj_.samples.push_back(TrajectorySample{world_.time, i + 1,
                                             world_.positions[i].x,
                                             world_.positions[i].y,
                                             world_.phases[i]});
  }
}

void SpatialWorld::step(std::span<const Vec2> extra) {
  control_step_with_push(world_, cfg_, extra);
  ++steps_;
  if (traj_stride_ > 0 && steps_ % traj_stride_ == 0) snapshot_now();
}

void SpatialWorld::hold_steps(int steps) {
  for (int i = 0; i < steps; ++i) step({});
}

void SpatialWorld::execute_op(const TopologyOp& op) {
  execute_ops({treemorph::apply(world_.tree, op).log});
}

void SpatialWorld::execute_ops(const std::vector<OpLogEntry>& round_ops) {
  if (round_ops.empty()) return;

  std::vector<Edge> all_added;
  for (const OpLogEntry& entry : round_ops) {
    for (const std::vector<NodeId>& cert : entry.certificates) {
      for (std::size_t i = 0; i + 1 < cert.size(); ++i) {
        world_.edge_targets[make_edge(cert[i], cert[i + 1])] = cfg_.r_transfer;
      }
    }
    for (const Edge& e : entry.added) all_added.push_back(e);
    for (NodeId v : touched_nodes(entry)) {
      world_.phases[v - 1] = Phase::kApproach;
    }
  }

  const double ready_dist = cfg_.r_range - 2.0 * cfg_.delta;
  auto ready = [&] {
    for (const Edge& e : all_added) {
      if (distance(world_.positions[e.a - 1], world_.positions[e.b - 1]) >=
          ready_dist) {
        return false;
      }
    }
    return true;
  };

  // Future endpoints also steer toward each other directly; the relay-edge
  // targets keep the rest of the tree in tow.
  std::vector<Vec2> extra(world_.positions.size());
  auto steer_to_partners = [&] {
    for (Vec2& v : extra) v = Vec2{};
    for (const Edge& e : all_added) {
      const Vec2& pa = world_.positions[e.a - 1];
      const Vec2& pb = world_.positions[e.b - 1];
      const double d = distance(pa, pb);
      if (d < 1e-12) continue;
      const double slope = 2.0 * (d - cfg_.r_transfer);
      const Vec2 dir{(pb.x - pa.x) / d, (pb.y - pa.y) / d};
      extra[e.a - 1] += dir * slope;
      extra[e.b - 1] += dir * (-slope);
    }
  };

  int spent = 0;
  while (!ready()) {
    if (spent++ >= limits_.approach_timeout_steps) {
      throw Error(ErrorCode::ApproachTimeout,
                  "approach not in range after " +
                      std::to_string(limits_.approach_timeout_steps) + " steps");
    }
    steer_to_partners();
    step(extra);
  }

  // Atomic rewire of the whole round.
  std::set<Edge> edge_set(world_.tree.edges().begin(), world_.tree.edges().end());
  for (const OpLogEntry& entry : round_ops) {
    for (const Edge& e : entry.removed) edge_set.erase(e);
    for (const Edge& e : entry.added) edge_set.insert(e);
  }
  try {
    world_.tree = LabeledTree::from_edges(
        world_.tree.node_count(), std::vector<Edge>(edge_set.begin(), edge_set.end()));
  } catch (const Error& err) {
    throw Error(ErrorCode::TreeInvariantBroken,
                std::string("spatial rewire broke the tree (") + err.what() + ")");
  }
  world_.edge_targets.clear();
  std::fill(world_.phases.begin(), world_.phases.end(), Phase::kHold);
  snapshot_now();
}

std::vector<NodeId> SpatialWorld::path_order() const {
  const LabeledTree& t = world_.tree;
  const int n = t.node_count();
  if (n == 2) return {1, 2};
  NodeId end = 0;
  for (NodeId v = 1; v <= n; ++v) {
    if (t.degree(v) == 1) {
      end = v;
      break;
    }
  }
  std::vector<NodeId> order{end};
  NodeId prev = 0, cur = end;
  while (static_cast<int>(order.size()) < n) {
    for (NodeId w : t.neighbors(cur)) {
      if (w == prev) continue;
      order.push_back(w);
      prev = cur;
      cur = w;
      break;
    }
  }
  return order;
}

double SpatialWorld::line_max_angle_deviation_deg() const {
  const std::vector<NodeId> order = path_order();
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < order.size(); ++i) {
    const Vec2& a = world_.positions[order[i - 1] - 1];
    const Vec2& b = world_.positions[order[i] - 1];
    const Vec2& c = world_.positions[order[i + 1] - 1];
    const Vec2 u{b.x - a.x, b.y - a.y}, v{c.x - b.x, c.y - b.y};
    const double cross = u.x * v.y - u.y * v.x;
    const double dot = u.x * v.x + u.y * v.y;
    const double dev = std::abs(std::atan2(std::abs(cross), dot)) * 180.0 / M_PI;
    worst = std::max(worst, dev);
  }
  return worst;
}

double SpatialWorld::star_max_gap_deviation_fraction() const {
  const NodeId center = center_of(world_.tree);
  const int n = world_.tree.node_count();
  std::vector<double> angles;
  const Vec2& c = world_.positions[center - 1];
  for (NodeId v = 1; v <= n; ++v) {
    if (v == center) continue;
    const Vec2& p = world_.positions[v - 1];
    angles.push_back(std::atan2(p.y - c.y, p.x - c.x));
  }
  if (angles.size() < 2) return 0.0;
  std::sort(angles.begin(), angles.end());
  const double ideal = 2.0 * M_PI / static_cast<double>(angles.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < angles.size(); ++i) {
    const double next = i + 1 < angles.size() ? angles[i + 1] : angles[0] + 2.0 * M_PI;
    worst = std::max(worst, std::abs(next - angles[i] - ideal) / ideal);
  }
  return worst;
}

double SpatialWorld::arrange(Protocol shape) {
  const double t0 = world_.time;
  const int n = world_.tree.node_count();
  std::fill(world_.phases.begin(), world_.phases.end(), Phase::kArrange);
  std::vector<Vec2> extra(static_cast<std::size_t>(n));

  int spent = 0;
  if (shape == Protocol::kLine) {
    if (!is_path_tree(world_.tree)) {
      throw Error(ErrorCode::WrongAttachment, "line arrangement needs a path tree");
    }
    const std::vector<NodeId> order = path_order();
    while (line_max_angle_deviation_deg() >= kLineDoneDeg) {
      for (int burst = 0; burst < kArrangeCheckEvery; ++burst) {
        for (Vec2& e : extra) e = Vec2{};
        for (std::size_t i = 1; i + 1 < order.size(); ++i) {
          const Vec2& a = world_.positions[order[i - 1] - 1];
          const Vec2& b = world_.positions[order[i] - 1];
          const Vec2& c = world_.positions[order[i + 1] - 1];
          extra[order[i] - 1] = Vec2{(a.x + c.x) * 0.5 - b.x,
                                     (a.y + c.y) * 0.5 - b.y} *
                                kMidpointGain;
        }
        step(extra);
      }
      spent += kArrangeCheckEvery;
      if (spent > limits_.arrange_timeout_steps) {
        throw Error(ErrorCode::ArrangeTimeout, "line not straight in time");
      }
    }
  } else {
    const NodeId center = center_of(world_.tree);
    while (star_max_gap_deviation_fraction() >= kStarDoneFraction) {
      for (int burst = 0; burst < kArrangeCheckEvery; ++burst) {
        for (Vec2& e : extra) e = Vec2{};
        const Vec2& c = world_.positions[center - 1];
        // leaves sorted by angle; tangential push toward the gap bisector
        std::vector<std::pair<double, NodeId>> ring;
        for (NodeId v = 1; v <= n; ++v) {
          if (v == center) continue;
          const Vec2& p = world_.positions[v - 1];
          ring.emplace_back(std::atan2(p.y - c.y, p.x - c.x), v);
        }
        std::sort(ring.begin(), ring.end());
        const std::size_t m = ring.size();
        for (std::size_t i = 0; i < m && m >= 2; ++i) {
          const double prev = ring[(i + m - 1) % m].first - (i == 0 ? 2.0 * M_PI : 0.0);
          const double next = ring[(i + 1) % m].first + (i + 1 == m ? 2.0 * M_PI : 0.0);
          const double here = ring[i].first;
          const double push = kAngularGain * ((next - here) - (here - prev));
          const Vec2& p = world_.positions[ring[i].second - 1];
          const double radius = distance(p, c);
          if (radius < 1e-9) continue;
          const Vec2 tangent{-(p.y - c.y) / radius, (p.x - c.x) / radius};
          extra[ring[i].second - 1] = tangent * (push * radius);
        }
        step(extra);
      }
      spent += kArrangeCheckEvery;
      if (spent > limits_.arrange_timeout_steps) {
        throw Error(ErrorCode::ArrangeTimeout, "star gaps not equal in time");
      }
    }
  }

  std::fill(world_.phases.begin(), world_.phases.end(), Phase::kHold);
  snapshot_now();
  return world_.time - t0;
}

}  // namespace treemorph
