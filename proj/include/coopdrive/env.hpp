#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coopdrive/scenario.hpp"
#include "coopdrive/world.hpp"

namespace coopdrive {

/// Discrete high-level actions shared by every learner.
enum class Action : int { kSlowDown = 0, kKeepLane = 1, kSpeedUp = 2, kLeftChange = 3 };
inline constexpr int kActionCount = 4;

std::array<double, kActionCount> one_hot(int action);

/// Per-robot observation: [lidar beams..., speed, lane flag].
using Observation = std::vector<double>;

inline constexpr double kObservationFloor = 1e-3;

Observation state_adapter(std::span<const double> lidar, double speed, int lane_flag, int beams,
                          double max_range);

/// Maps an action index to a longitudinal command. Throws std::out_of_range
/// for indices outside [0, 3].
MotionCommand action_adapter(int action, double speed_step, double dt);

/// Reward breakdown for the learner slots of one step.
struct RewardRecord {
  std::vector<int> robot_ids;
  std::vector<double> r_travel;
  std::vector<double> r_col;
  std::vector<double> r_total;
  double team_reward = 0.0;

  /// Team mode hands every slot the shared scalar; otherwise each slot's r_total.
  std::vector<double> rewards(bool team_mode) const;
};

/// r_travel = progress / (v_max dt) clipped to [0,1]; r_col = -penalty for any
/// robot in `events`; r_total = alpha r_col + (1 - alpha) r_travel; the team
/// reward is the mean r_total.
RewardRecord reward_adapter(std::span<const CollisionEvent> events, std::span<const int> robot_ids,
                            std::span<const double> progress, const RewardParams& params,
                            double v_max, double dt);

/// Per-step readout noise registered by apply_randomization.
struct NoiseModel {
  double sensor_sigma = 0.0;
  double speed_sigma = 0.0;

  bool is_identity() const { return sensor_sigma == 0.0 && speed_sigma == 0.0; }
  /// Adds N(0, sensor_sigma^2) to every beam, one draw per beam in order
  /// (no draws when the sigma is zero).
  void perturb_lidar(std::span<double> lidar, Rng& rng) const;
  double perturb_speed(double v, Rng& rng) const;
};

struct RandomizationOutcome {
  NoiseModel noise;
  std::optional<int> socially_driven;  // learner id handed to the social agent
};

class RandomizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kPlacementRetries = 100;

/// Jitters initial positions (resampling until collision-free, at most
/// kPlacementRetries attempts), returns the readout noise hooks, and with
/// probability `social_replacement_prob` converts one uniformly chosen learner
/// into a social robot. Zero-valued settings consume no random draws.
RandomizationOutcome apply_randomization(WorldState& world, const RandomizationConfig& rc, Rng& rng);

struct StepInfo {
  std::vector<CollisionEvent> collisions;
  std::vector<int> robot_ids;       // every robot, roster order
  std::vector<bool> success;        // parallel to robot_ids
  std::vector<double> true_speeds;  // parallel to robot_ids
  std::vector<bool> socially_driven;  // parallel to learner slots
  int t = 0;
};

struct StepResult {
  std::vector<Observation> observations;
  RewardRecord rewards;
  std::vector<bool> dones;
  StepInfo info;
};

/// Agent-environment loop over one scenario: make -> reset -> step* -> done.
///
/// Learner slots are the roster learners in roster order. Their count never
/// changes, even when a learner is handed to the social agent for an episode:
/// that slot still receives observations and rewards, but its action is
/// ignored. Observation noise never touches the ground-truth world.
class Env {
 public:
  explicit Env(ScenarioConfig config);

  static Env make(const std::string& scenario_name, const std::vector<std::string>& overrides = {});
  static Env make(const std::string& scenario_name, const std::vector<std::string>& overrides,
                  const ScenarioCatalog& catalog);

  /// Re-initializes the world. Without a seed, continues from the previous
  /// seed plus one (starting at 0).
  std::vector<Observation> reset(std::optional<std::uint64_t> seed = std::nullopt);
  StepResult step(std::span<const int> actions);

  const ScenarioConfig& scenario() const { return config_; }
  const WorldState& world() const { return world_; }
  const std::vector<int>& learner_ids() const { return learner_ids_; }
  std::size_t learner_count() const { return learner_ids_.size(); }
  std::size_t observation_size() const { return static_cast<std::size_t>(config_.lidar.beams) + 2; }
  static constexpr int action_count() { return kActionCount; }

  std::optional<int> socially_driven() const { return randomized_.socially_driven; }
  bool episode_over() const { return done_; }
  int steps_taken() const { return world_.t; }
  std::uint64_t last_seed() const { return seed_; }
  /// Cumulative forward travel of each learner slot this episode (m).
  const std::vector<double>& travelled() const { return travelled_; }

  /// Probability of handing one learner to the social agent at each reset.
  void set_social_replacement(double prob);

 private:
  std::vector<Observation> observe();

  ScenarioConfig config_;
  std::vector<int> learner_ids_;
  WorldState world_;
  RandomizationOutcome randomized_;
  Rng noise_rng_;
  std::uint64_t seed_ = 0;
  bool has_reset_ = false;
  bool done_ = false;
  std::vector<double> travelled_;
};

}  // namespace coopdrive
