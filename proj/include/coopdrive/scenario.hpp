#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "coopdrive/idm.hpp"
#include "json.hpp"

namespace coopdrive {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Topology { kParallelMerge, kCrossIntersection };
enum class Axis { kX, kY };
enum class RobotKind { kLearner, kSocial, kStatic };

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

/// Straight lane segment. A robot at longitudinal position s on this lane sits
/// at along-axis coordinate `start + direction * s` and perpendicular
/// coordinate `center_offset` (plus its lateral offset toward the lane's left).
struct Lane {
  int id = 0;
  Axis axis = Axis::kX;
  int direction = 1;  // +1 or -1 along the axis
  double center_offset = 0.0;
  double start = 0.0;
  double length = 2.6;
  double width = 0.25;
  std::optional<int> left_neighbor;

  Vec2 heading() const;
  Vec2 left() const;
  Vec2 point(double s, double lateral) const;

  friend bool operator==(const Lane&, const Lane&) = default;
};

/// Axis-aligned rectangle [min.x, max.x] x [min.y, max.y].
struct Box {
  Vec2 min;
  Vec2 max;

  friend bool operator==(const Box&, const Box&) = default;
};

struct LaneGeometry {
  Topology topology = Topology::kParallelMerge;
  std::vector<Lane> lanes;

  const Lane& lane(int id) const;
  bool has_lane(int id) const;
  /// Bounding box of every lane rectangle; lidar treats it as walls.
  Box arena() const;
  /// Square where the two perpendicular axes overlap (cross topology only).
  Box conflict_zone() const;
  /// Longitudinal coordinate, on `lane_id`, of the conflict zone's far edge.
  double conflict_exit_s(int lane_id) const;
  /// Lateral offset of `to`'s center as seen from `from` (positive = left).
  double lateral_between(int from, int to) const;

  friend bool operator==(const LaneGeometry&, const LaneGeometry&) = default;
};

struct RobotSpec {
  int id = 0;
  RobotKind kind = RobotKind::kLearner;
  int lane = 0;
  double s_min = 0.0;  // initial longitudinal position is uniform in [s_min, s_max]
  double s_max = 0.0;
  double initial_speed = 0.0;
  double radius = 0.08;

  friend bool operator==(const RobotSpec&, const RobotSpec&) = default;
};

struct RewardParams {
  double alpha = 0.5;
  double collision_penalty = 1.0;
  bool team_mode = true;

  friend bool operator==(const RewardParams&, const RewardParams&) = default;
};

struct RandomizationConfig {
  // Extra uniform jitter half-width per roster entry (m); empty means none.
  std::vector<double> position_jitter;
  double sensor_noise = 0.0;  // lidar readout std (m)
  double speed_noise = 0.0;   // speed readout std (m/s)
  double social_replacement_prob = 0.0;

  friend bool operator==(const RandomizationConfig&, const RandomizationConfig&) = default;
};

struct LidarParams {
  int beams = 16;
  double range = 3.5;

  friend bool operator==(const LidarParams&, const LidarParams&) = default;
};

/// Success bookkeeping for the lane-change task.
struct MergeTask {
  int merging_robot = 2;
  int target_lane = 1;
  int obstacle_robot = 3;

  friend bool operator==(const MergeTask&, const MergeTask&) = default;
};

inline constexpr const char* kLaneChangeScenario = "lane_change";
inline constexpr const char* kCrossIntersectionScenario = "cross_intersection";

struct ScenarioConfig {
  std::string name;
  LaneGeometry geometry;
  std::vector<RobotSpec> robots;
  int episode_length = 18;
  double dt = 0.5;
  double substep = 0.05;
  double v_max = 0.26;
  double accel_cap = 0.5;
  double speed_step = 0.05;
  int lane_change_steps = 4;
  RewardParams reward;
  RandomizationConfig randomization;
  LidarParams lidar;
  IDMParams social_agent;
  std::optional<MergeTask> merge_task;

  const RobotSpec& robot(int id) const;
  std::vector<int> learner_ids() const;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Throws ConfigError describing the first violated invariant.
void validate(const ScenarioConfig& config);

ScenarioConfig scenario_from_json(const nlohmann::json& doc);
nlohmann::json scenario_to_json(const ScenarioConfig& config);

/// Applies `key=value` overrides where key is a dotted path into the scenario
/// document (e.g. `reward.alpha=0.7`). Values parse as JSON, falling back to a
/// string. Unknown paths raise ConfigError.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Locates `<name>.json` in a scenario directory.
class ScenarioCatalog {
 public:
  explicit ScenarioCatalog(std::filesystem::path dir);
  /// Directory from $COOPDRIVE_SCENARIO_DIR, else the one shipped with the source tree.
  static ScenarioCatalog standard();

  std::vector<std::string> names() const;
  nlohmann::json document(const std::string& name) const;
  ScenarioConfig load(const std::string& name, const std::vector<std::string>& overrides = {}) const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

class UnknownScenario : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

}  // namespace coopdrive
