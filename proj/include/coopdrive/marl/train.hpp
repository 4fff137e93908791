#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "coopdrive/env.hpp"
#include "coopdrive/marl/hyperparams.hpp"
#include "coopdrive/marl/learner.hpp"

namespace coopdrive::marl {

inline constexpr double kNoLoss = std::numeric_limits<double>::quiet_NaN();

/// One row of the training (or evaluation) log.
struct EpisodeRecord {
  int episode = 0;
  double mean_step_reward = 0.0;  // mean per-step team reward
  bool collision = false;
  double success_rate = 0.0;  // over success-eligible robots
  double mean_speed = 0.0;    // over learner slots and steps
  double epsilon = 0.0;
  double loss_critic = kNoLoss;  // NaN when no update ran this episode
  double loss_actor = kNoLoss;
};

using TrainingLog = std::vector<EpisodeRecord>;

/// Robots whose success is scored: the merging robot when the scenario has a
/// merge task, otherwise every learner.
std::vector<int> success_eligible(const ScenarioConfig& config);

struct EpisodeOutcome {
  EpisodeRecord record;
  std::optional<int> socially_driven;
  int steps = 0;
};

using ActFn = std::function<std::vector<int>(const std::vector<Observation>&)>;
using StepHook = std::function<void(const Transition&)>;

/// Resets `env` with `seed` and plays until done.
EpisodeOutcome play_episode(Env& env, std::uint64_t seed, const ActFn& act, const StepHook& hook = {});

struct TrainResult {
  TrainingLog log;
  std::unique_ptr<Learner> learner;
};

using ProgressFn = std::function<void(const EpisodeRecord&)>;

/// Runs hp.episodes training episodes. Deterministic in (algo, scenario, hp,
/// seed). hp.episode_length > 0 overrides the scenario horizon. Throws
/// TrainingError on a nonfinite loss.
TrainResult train(Algo algo, Env& env, const Hyperparams& hp, std::uint64_t seed, const ProgressFn& progress = {});

}  // namespace coopdrive::marl
