#include "coopdrive/social_agent.hpp"

#include <algorithm>
#include <string>

namespace coopdrive {

namespace {

bool occupies_lane(const RobotState& r, int lane) {
  return r.lane == lane || (r.lane_change && r.lane_change->target_lane == lane);
}

}  // namespace

std::optional<LeaderInfo> find_leader(const WorldState& world, int robot_id) {
  const RobotState& self = world.robot(robot_id);
  std::optional<LeaderInfo> best;
  for (const auto& other : world.robots) {
    if (other.id == robot_id || !occupies_lane(other, self.lane)) continue;
    // Parallel lanes share their start, so s is comparable across them.
    if (!(other.s > self.s)) continue;
    const double gap = (other.s - self.s) - self.radius - other.radius;
    if (!best || gap < best->gap) best = LeaderInfo{other.id, gap, self.v - other.v};
  }
  return best;
}

MotionCommand social_policy(const WorldState& world, int robot_id, const IDMParams& p, Rng& rng,
                            double free_gap) {
  const RobotState& self = world.robot(robot_id);
  if (self.kind != RobotKind::kSocial) {
    throw SimError("social_policy called on non-social robot " + std::to_string(robot_id));
  }
  const auto leader = find_leader(world, robot_id);
  const double gap = leader ? leader->gap : free_gap;
  const double dv = leader ? leader->closing_speed : 0.0;
  // A leader overlapping in s (e.g. mid lane change) is the gap -> 0+ limit: full braking.
  if (!(gap > 0.0)) return MotionCommand{-world.params.accel_cap, false};
  const double accel = pu_idm_accel(self.v, gap, dv, p, rng);
  return MotionCommand{std::clamp(accel, -world.params.accel_cap, p.a), false};
}

}  // namespace coopdrive
