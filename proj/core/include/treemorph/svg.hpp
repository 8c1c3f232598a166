#pragma once

#include <string>

#include "treemorph/spatial.hpp"

namespace treemorph {

// Renders a flight summary: gray per-robot trails, red markers at the first
// sample, green at the last, and the final tree drawn in black. Standalone
// SVG document; y grows upward (negated into screen space).
std::string render_world_svg(const Trajectory& trajectory,
                             const WorldState& final_world,
                             const RangeConfig& cfg);

}  // namespace treemorph
