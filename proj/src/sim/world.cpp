#include "coopdrive/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace coopdrive {

int WorldParams::substeps_per_step() const {
  return static_cast<int>(std::lround(dt / substep));
}

const RobotState& WorldState::robot(int id) const { return robots[index_of(id)]; }

RobotState& WorldState::robot(int id) { return robots[index_of(id)]; }

std::size_t WorldState::index_of(int id) const {
  for (std::size_t i = 0; i < robots.size(); ++i) {
    if (robots[i].id == id) return i;
  }
  throw SimError("unknown robot id " + std::to_string(id));
}

Vec2 WorldState::position(const RobotState& r) const {
  return geometry.lane(r.lane).point(r.s, r.lateral);
}

WorldState load_scenario(const ScenarioConfig& config, std::uint64_t seed) {
  validate(config);
  WorldState world;
  world.geometry = config.geometry;
  world.params = WorldParams{config.episode_length, config.dt,        config.substep,
                             config.v_max,          config.accel_cap, config.lane_change_steps};
  world.merge_task = config.merge_task;
  world.rng = make_rng(seed);
  for (const auto& spec : config.robots) {
    RobotState r;
    r.id = spec.id;
    r.kind = spec.kind;
    r.lane = spec.lane;
    r.lane_flag = spec.lane;
    r.radius = spec.radius;
    const double u = uniform01(world.rng);
    r.s = spec.s_min + u * (spec.s_max - spec.s_min);
    r.v = spec.kind == RobotKind::kStatic ? 0.0 : spec.initial_speed;
    world.robots.push_back(r);
  }
  return world;
}

std::vector<CollisionEvent> detect_collisions(const WorldState& world) {
  std::vector<CollisionEvent> events;
  const auto& rs = world.robots;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    const Vec2 pi = world.position(rs[i]);
    for (std::size_t j = i + 1; j < rs.size(); ++j) {
      const Vec2 pj = world.position(rs[j]);
      const double dx = pi.x - pj.x;
      const double dy = pi.y - pj.y;
      const double reach = rs[i].radius + rs[j].radius;
      if (dx * dx + dy * dy < reach * reach) {
        events.push_back({std::min(rs[i].id, rs[j].id), std::max(rs[i].id, rs[j].id), world.t});
      }
    }
  }
  return events;
}

std::vector<CollisionEvent> step_world(WorldState& world,
                                       std::span<const std::optional<MotionCommand>> commands) {
  if (world.status != EpisodeStatus::kRunning) throw SimError("step after terminal status");
  if (commands.size() != world.robots.size()) {
    throw SimError("expected " + std::to_string(world.robots.size()) + " command slots, got " +
                   std::to_string(commands.size()));
  }
  const auto& prm = world.params;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    const auto& r = world.robots[i];
    if (r.kind == RobotKind::kStatic && commands[i]) {
      throw SimError("command given to static robot " + std::to_string(r.id));
    }
    if (r.kind != RobotKind::kStatic && !commands[i]) {
      throw SimError("missing command for robot " + std::to_string(r.id));
    }
    if (commands[i] && !(std::abs(commands[i]->accel) <= prm.accel_cap + 1e-12)) {
      throw SimError("acceleration command exceeds accel_cap for robot " + std::to_string(r.id));
    }
  }

  // A request only starts a maneuver when a left neighbor exists and no
  // maneuver is running; otherwise it is a no-op.
  for (std::size_t i = 0; i < commands.size(); ++i) {
    auto& r = world.robots[i];
    if (!commands[i] || !commands[i]->lane_change_request || r.lane_change) continue;
    const auto& neighbor = world.geometry.lane(r.lane).left_neighbor;
    if (!neighbor) continue;
    r.lane_change = LaneChange{*neighbor, 0, prm.lane_change_steps,
                               world.geometry.lateral_between(r.lane, *neighbor)};
  }

  const int n = prm.substeps_per_step();
  const double h = prm.substep;
  const int next_t = world.t + 1;
  std::vector<CollisionEvent> events;
  for (int k = 1; k <= n; ++k) {
    for (std::size_t i = 0; i < world.robots.size(); ++i) {
      auto& r = world.robots[i];
      if (r.kind == RobotKind::kStatic) continue;
      r.v = std::clamp(r.v + commands[i]->accel * h, 0.0, prm.v_max);
      r.s += r.v * h;
      if (r.lane_change) {
        const auto& lc = *r.lane_change;
        const double fraction = static_cast<double>(lc.steps_done * n + k) / (lc.total_steps * n);
        r.lateral = lc.target_lateral * fraction;
      }
    }
    events = detect_collisions(world);
    if (!events.empty()) break;
  }

  if (events.empty()) {
    for (auto& r : world.robots) {
      if (!r.lane_change) continue;
      auto& lc = *r.lane_change;
      ++lc.steps_done;
      if (lc.steps_done >= lc.total_steps) {
        r.lane = lc.target_lane;
        r.lane_flag = lc.target_lane;
        r.lateral = 0.0;
        r.lane_change.reset();
      }
    }
  }

  world.t = next_t;
  for (auto& e : events) {
    e.t = next_t;
    for (int id : {e.robot_a, e.robot_b}) {
      if (std::find(world.collided.begin(), world.collided.end(), id) == world.collided.end()) {
        world.collided.push_back(id);
      }
    }
  }
  if (!events.empty()) {
    world.status = EpisodeStatus::kCollided;
  } else if (world.t >= prm.episode_length) {
    world.status = EpisodeStatus::kDone;
  }
  return events;
}

std::vector<double> raycast_lidar(const WorldState& world, int robot_id, int beams, double max_range) {
  if (beams < 1) throw SimError("lidar needs at least one beam");
  const RobotState& self = world.robot(robot_id);
  const Vec2 origin = world.position(self);
  const Vec2 heading = world.geometry.lane(self.lane).heading();
  const Box arena = world.geometry.arena();

  std::vector<double> ranges(static_cast<std::size_t>(beams), max_range);
  for (int k = 0; k < beams; ++k) {
    // Beams past the half turn use the equivalent negative angle (exact mirror symmetry).
    const int signed_k = 2 * k > beams ? k - beams : k;
    const double angle = 2.0 * std::numbers::pi * signed_k / beams;
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const Vec2 d{heading.x * c - heading.y * s, heading.x * s + heading.y * c};

    double best = std::numeric_limits<double>::infinity();
    // Arena walls: exit distance from the box along the ray.
    if (d.x > 0.0) best = std::min(best, (arena.max.x - origin.x) / d.x);
    if (d.x < 0.0) best = std::min(best, (arena.min.x - origin.x) / d.x);
    if (d.y > 0.0) best = std::min(best, (arena.max.y - origin.y) / d.y);
    if (d.y < 0.0) best = std::min(best, (arena.min.y - origin.y) / d.y);

    for (const auto& other : world.robots) {
      if (other.id == robot_id) continue;
      const Vec2 center = world.position(other);
      const Vec2 oc{origin.x - center.x, origin.y - center.y};
      const double b = oc.x * d.x + oc.y * d.y;
      const double cc = oc.x * oc.x + oc.y * oc.y - other.radius * other.radius;
      if (cc <= 0.0) {
        best = 0.0;  // origin inside the other footprint
        continue;
      }
      const double disc = b * b - cc;
      if (disc < 0.0) continue;
      const double hit = -b - std::sqrt(disc);
      if (hit > 0.0) best = std::min(best, hit);
    }
    ranges[static_cast<std::size_t>(k)] = std::clamp(best, kLidarMinRange, max_range);
  }
  return ranges;
}

bool check_success(const WorldState& world, int robot_id) {
  const RobotState& r = world.robot(robot_id);
  if (r.kind == RobotKind::kStatic) return false;
  if (std::find(world.collided.begin(), world.collided.end(), robot_id) != world.collided.end()) {
    return false;
  }
  if (world.geometry.topology == Topology::kCrossIntersection) {
    return r.s > world.geometry.conflict_exit_s(r.lane);
  }
  if (world.merge_task && world.merge_task->merging_robot == robot_id) {
    const auto& task = *world.merge_task;
    return r.lane_flag == task.target_lane && r.s > world.robot(task.obstacle_robot).s;
  }
  return true;
}

}  // namespace coopdrive
