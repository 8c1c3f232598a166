#include "treemorph/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

namespace treemorph {

namespace {

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

std::string render_world_svg(const Trajectory& trajectory,
                             const WorldState& final_world,
                             const RangeConfig& cfg) {
  double min_x = 0.0, max_x = 0.0, min_y = 0.0, max_y = 0.0;
  bool first = true;
  auto grow = [&](double x, double y) {
    if (first) {
      min_x = max_x = x;
      min_y = max_y = y;
      first = false;
      return;
    }
    min_x = std::min(min_x, x);
    max_x = std::max(max_x, x);
    min_y = std::min(min_y, y);
    max_y = std::max(max_y, y);
  };
  for (const TrajectorySample& s : trajectory.samples) grow(s.x, s.y);
  for (const Vec2& p : final_world.positions) grow(p.x, p.y);
  if (first) grow(0.0, 0.0);

  const double margin = 0.25 * cfg.r_range;
  min_x -= margin;
  min_y -= margin;
  max_x += margin;
  max_y += margin;

  // screen y = -world y, so the viewBox top is -max_y
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" + num(min_x) +
         " " + num(-max_y) + " " + num(max_x - min_x) + " " +
         num(max_y - min_y) + "\">\n";
  out += "<rect x=\"" + num(min_x) + "\" y=\"" + num(-max_y) + "\" width=\"" +
         num(max_x - min_x) + "\" height=\"" + num(max_y - min_y) +
         "\" fill=\"white\"/>\n";

  std::map<int, std::vector<TrajectorySample>> by_robot;
  for (const TrajectorySample& s : trajectory.samples) {
    by_robot[s.robot].push_back(s);
  }

  const double stroke = 0.01 * cfg.r_range;
  const double marker = 0.04 * cfg.r_range;
  for (const auto& [robot, samples] : by_robot) {
    out += "<polyline fill=\"none\" stroke=\"#bbbbbb\" stroke-width=\"" +
           num(stroke) + "\" points=\"";
    for (const TrajectorySample& s : samples) {
      out += num(s.x) + "," + num(-s.y) + " ";
    }
    out += "\"/>\n";
  }

  for (const Edge& e : final_world.tree.edges()) {
    const Vec2& a = final_world.positions[e.a - 1];
    const Vec2& b = final_world.positions[e.b - 1];
    out += "<line x1=\"" + num(a.x) + "\" y1=\"" + num(-a.y) + "\" x2=\"" +
           num(b.x) + "\" y2=\"" + num(-b.y) +
           "\" stroke=\"black\" stroke-width=\"" + num(1.5 * stroke) + "\"/>\n";
  }

  for (const auto& [robot, samples] : by_robot) {
    const TrajectorySample& s0 = samples.front();
    out += "<circle cx=\"" + num(s0.x) + "\" cy=\"" + num(-s0.y) + "\" r=\"" +
           num(marker) + "\" fill=\"#cc2222\"/>\n";
  }
  for (std::size_t i = 0; i < final_world.positions.size(); ++i) {
    const Vec2& p = final_world.positions[i];
    out += "<circle cx=\"" + num(p.x) + "\" cy=\"" + num(-p.y) + "\" r=\"" +
           num(marker) + "\" fill=\"#22aa44\"/>\n";
  }

  out += "</svg>\n";
  return out;
}

}  // namespace treemorph
