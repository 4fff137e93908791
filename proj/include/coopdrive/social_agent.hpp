#pragma once

#include <optional>

#include "coopdrive/idm.hpp"
#include "coopdrive/world.hpp"

namespace coopdrive {

struct LeaderInfo {
  int id = 0;
  double gap = 0.0;  // footprint edge to footprint edge (m)
  double closing_speed = 0.0;
};

/// Nearest robot ahead that occupies the same lane (including robots merging
/// into it).
std::optional<LeaderInfo> find_leader(const WorldState& world, int robot_id);

/// IDM-driven command for a social robot. Without a leader the gap is the
/// sensing range `free_gap`. Output acceleration is clamped to
/// [-accel_cap, a].
MotionCommand social_policy(const WorldState& world, int robot_id, const IDMParams& p, Rng& rng,
                            double free_gap);

}  // namespace coopdrive
