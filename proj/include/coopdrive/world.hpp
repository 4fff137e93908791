#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "coopdrive/rng.hpp"
#include "coopdrive/scenario.hpp"

namespace coopdrive {

/// Raised when a caller breaks a stepping contract (wrong command layout,
/// stepping a finished episode, unknown robot id).
class SimError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// In-progress left lane change. Lateral offset grows linearly from 0 to
/// `target_lateral` over `total_steps` control steps.
struct LaneChange {
  int target_lane = 0;
  int steps_done = 0;
  int total_steps = 1;
  double target_lateral = 0.0;

  double progress() const { return static_cast<double>(steps_done) / total_steps; }

  friend bool operator==(const LaneChange&, const LaneChange&) = default;
};

struct RobotState {
  int id = 0;
  RobotKind kind = RobotKind::kLearner;
  int lane = 0;
  double s = 0.0;
  double lateral = 0.0;
  double v = 0.0;
  int lane_flag = 0;
  std::optional<LaneChange> lane_change;
  double radius = 0.08;

  friend bool operator==(const RobotState&, const RobotState&) = default;
};

struct MotionCommand {
  double accel = 0.0;
  bool lane_change_request = false;

  friend bool operator==(const MotionCommand&, const MotionCommand&) = default;
};

struct CollisionEvent {
  int robot_a = 0;  // robot_a < robot_b
  int robot_b = 0;
  int t = 0;

  friend bool operator==(const CollisionEvent&, const CollisionEvent&) = default;
};

enum class EpisodeStatus { kRunning, kCollided, kDone };

struct WorldParams {
  int episode_length = 18;
  double dt = 0.5;
  double substep = 0.05;
  double v_max = 0.26;
  double accel_cap = 0.5;
  int lane_change_steps = 4;

  int substeps_per_step() const;

  friend bool operator==(const WorldParams&, const WorldParams&) = default;
};

struct WorldState {
  std::vector<RobotState> robots;
  LaneGeometry geometry;
  WorldParams params;
  std::optional<MergeTask> merge_task;
  int t = 0;
  EpisodeStatus status = EpisodeStatus::kRunning;
  std::vector<int> collided;  // ids involved in any collision so far
  Rng rng;

  const RobotState& robot(int id) const;
  RobotState& robot(int id);
  std::size_t index_of(int id) const;
  Vec2 position(const RobotState& r) const;

  friend bool operator==(const WorldState&, const WorldState&) = default;
};

/// Fresh world at t = 0 with every robot placed uniformly inside its
/// configured s range (one uniform draw per roster entry, in roster order).
WorldState load_scenario(const ScenarioConfig& config, std::uint64_t seed);

/// Advances one control step. `commands` is parallel to `world.robots`;
/// non-static robots need a command and static robots must have none.
/// Integration stops at the first substep where robots overlap; the returned
/// events describe that configuration and carry the new step index.
std::vector<CollisionEvent> step_world(WorldState& world,
                                       std::span<const std::optional<MotionCommand>> commands);

/// All pairs whose centers are closer than the sum of their radii.
std::vector<CollisionEvent> detect_collisions(const WorldState& world);

inline constexpr double kLidarMinRange = 1e-3;

/// K beams, beam k at angle 2*pi*k/K counterclockwise from the lane heading.
/// Each reading is the distance to the nearest other robot or arena wall,
/// clipped to [kLidarMinRange, max_range].
std::vector<double> raycast_lidar(const WorldState& world, int robot_id, int beams, double max_range);

bool check_success(const WorldState& world, int robot_id);

}  // namespace coopdrive
