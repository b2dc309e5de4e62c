#pragma once

#include <string>

#include "longctl/sim.hpp"

namespace longctl {

// Three stacked panels mirroring the usual trajectory layout: distance
// (h, h_des), speed (v_H, v_des, v_P) and acceleration (a_H, u, a_des).
// Plain polylines, no plotting dependency; the CSV stays the canonical output.
std::string render_svg(const Trajectory& traj, const ControllerParams& params,
                       const std::string& title);

}  // namespace longctl
