#include "coopdrive/env.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "coopdrive/social_agent.hpp"

namespace coopdrive {

std::array<double, kActionCount> one_hot(int action) {
  if (action < 0 || action >= kActionCount) {
    throw std::out_of_range("action index " + std::to_string(action) + " outside [0, 3]");
  }
  std::array<double, kActionCount> v{};
  v[static_cast<std::size_t>(action)] = 1.0;
  return v;
}

Observation state_adapter(std::span<const double> lidar, double speed, int lane_flag, int beams,
                          double max_range) {
  if (static_cast<int>(lidar.size()) != beams) {
    throw std::invalid_argument("state_adapter: expected " + std::to_string(beams) +
                                " lidar beams, got " + std::to_string(lidar.size()));
  }
  Observation obs;
  obs.reserve(lidar.size() + 2);
  for (double d : lidar) obs.push_back(std::clamp(d, kObservationFloor, max_range));
  obs.push_back(speed);
  obs.push_back(static_cast<double>(lane_flag));
  return obs;
}

MotionCommand action_adapter(int action, double speed_step, double dt) {
  switch (action) {
    case static_cast<int>(Action::kSlowDown): return {-speed_step / dt, false};
    case static_cast<int>(Action::kKeepLane): return {0.0, false};
    case static_cast<int>(Action::kSpeedUp): return {speed_step / dt, false};
    case static_cast<int>(Action::kLeftChange): return {0.0, true};
    default:
      throw std::out_of_range("action index " + std::to_string(action) + " outside [0, 3]");
  }
}

std::vector<double> RewardRecord::rewards(bool team_mode) const {
  if (team_mode) return std::vector<double>(r_total.size(), team_reward);
  return r_total;
}

RewardRecord reward_adapter(std::span<const CollisionEvent> events, std::span<const int> robot_ids,
                            std::span<const double> progress, const RewardParams& params,
                            double v_max, double dt) {
  if (robot_ids.size() != progress.size()) {
    throw std::invalid_argument("reward_adapter: one progress value per robot required");
  }
  RewardRecord rec;
  rec.robot_ids.assign(robot_ids.begin(), robot_ids.end());
  const double alpha = params.alpha;
  double sum = 0.0;
  for (std::size_t i = 0; i < robot_ids.size(); ++i) {
    const int id = robot_ids[i];
    const bool hit = std::any_of(events.begin(), events.end(), [id](const CollisionEvent& e) {
      return e.robot_a == id || e.robot_b == id;
    });
    const double travel = std::clamp(progress[i] / (v_max * dt), 0.0, 1.0);
    const double col = hit ? -params.collision_penalty : 0.0;
    const double total = alpha * col + (1.0 - alpha) * travel;
    rec.r_travel.push_back(travel);
    rec.r_col.push_back(col);
    rec.r_total.push_back(total);
    sum += total;
  }
  rec.team_reward = robot_ids.empty() ? 0.0 : sum / static_cast<double>(robot_ids.size());
  return rec;
}

void NoiseModel::perturb_lidar(std::span<double> lidar, Rng& rng) const {
  if (sensor_sigma == 0.0) return;
  for (double& d : lidar) d += sensor_sigma * standard_normal(rng);
}

double NoiseModel::perturb_speed(double v, Rng& rng) const {
  if (speed_sigma == 0.0) return v;
  return v + speed_sigma * standard_normal(rng);
}

RandomizationOutcome apply_randomization(WorldState& world, const RandomizationConfig& rc, Rng& rng) {
  RandomizationOutcome out;
  out.noise = NoiseModel{rc.sensor_noise, rc.speed_noise};

  const bool jitter = std::any_of(rc.position_jitter.begin(), rc.position_jitter.end(),
                                  [](double j) { return j > 0.0; });
  if (jitter) {
    if (rc.position_jitter.size() != world.robots.size()) {
      throw std::invalid_argument("position_jitter needs one entry per robot");
    }
    std::vector<double> base;
    for (const auto& r : world.robots) base.push_back(r.s);
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementRetries && !placed; ++attempt) {
      for (std::size_t i = 0; i < world.robots.size(); ++i) {
        const double j = rc.position_jitter[i];
        world.robots[i].s = base[i];
        if (j > 0.0) world.robots[i].s += std::uniform_real_distribution<double>(-j, j)(rng);
      }
      placed = detect_collisions(world).empty();
    }
    if (!placed) {
      for (std::size_t i = 0; i < world.robots.size(); ++i) world.robots[i].s = base[i];
      throw RandomizationError("cannot place robots collision-free within the retry budget");
    }
  }

  if (rc.social_replacement_prob > 0.0 && uniform01(rng) < rc.social_replacement_prob) {
    std::vector<std::size_t> learners;
    for (std::size_t i = 0; i < world.robots.size(); ++i) {
      if (world.robots[i].kind == RobotKind::kLearner) learners.push_back(i);
    }
    if (!learners.empty()) {
      const auto pick = learners[static_cast<std::size_t>(
          uniform_int(rng, 0, static_cast<int>(learners.size()) - 1))];
      world.robots[pick].kind = RobotKind::kSocial;
      out.socially_driven = world.robots[pick].id;
    }
  }
  return out;
}

Env::Env(ScenarioConfig config) : config_(std::move(config)) {
  validate(config_);
  learner_ids_ = config_.learner_ids();
  travelled_.assign(learner_ids_.size(), 0.0);
}

Env Env::make(const std::string& scenario_name, const std::vector<std::string>& overrides) {
  return make(scenario_name, overrides, ScenarioCatalog::standard());
}

Env Env::make(const std::string& scenario_name, const std::vector<std::string>& overrides,
              const ScenarioCatalog& catalog) {
  return Env(catalog.load(scenario_name, overrides));
}

void Env::set_social_replacement(double prob) {
  if (!(prob >= 0.0 && prob <= 1.0)) throw ConfigError("social replacement probability outside [0,1]");
  config_.randomization.social_replacement_prob = prob;
}

std::vector<Observation> Env::reset(std::optional<std::uint64_t> seed) {
  if (seed) {
    seed_ = *seed;
  } else {
    seed_ = has_reset_ ? seed_ + 1 : 0;
  }
  world_ = load_scenario(config_, seed_);
  noise_rng_ = make_rng(seed_, 1);
  randomized_ = apply_randomization(world_, config_.randomization, noise_rng_);
  has_reset_ = true;
  done_ = false;
  std::fill(travelled_.begin(), travelled_.end(), 0.0);
  return observe();
}

std::vector<Observation> Env::observe() {
  std::vector<Observation> obs;
  obs.reserve(learner_ids_.size());
  for (int id : learner_ids_) {
    auto lidar = raycast_lidar(world_, id, config_.lidar.beams, config_.lidar.range);
    randomized_.noise.perturb_lidar(lidar, noise_rng_);
    const auto& r = world_.robot(id);
    const double speed = randomized_.noise.perturb_speed(r.v, noise_rng_);
    obs.push_back(state_adapter(lidar, speed, r.lane_flag, config_.lidar.beams, config_.lidar.range));
  }
  return obs;
}

StepResult Env::step(std::span<const int> actions) {
  if (!has_reset_) throw SimError("step before reset");
  if (done_) throw SimError("step after done");
  if (actions.size() != learner_ids_.size()) {
    throw SimError("expected " + std::to_string(learner_ids_.size()) + " actions, got " +
                   std::to_string(actions.size()));
  }

  std::vector<std::optional<MotionCommand>> commands(world_.robots.size());
  for (std::size_t slot = 0; slot < learner_ids_.size(); ++slot) {
    const auto cmd = action_adapter(actions[slot], config_.speed_step, config_.dt);
    const std::size_t idx = world_.index_of(learner_ids_[slot]);
    if (world_.robots[idx].kind == RobotKind::kLearner) commands[idx] = cmd;
  }
  for (std::size_t i = 0; i < world_.robots.size(); ++i) {
    if (world_.robots[i].kind == RobotKind::kSocial) {
      commands[i] = social_policy(world_, world_.robots[i].id, config_.social_agent, world_.rng,
                                  config_.lidar.range);
    }
  }

  std::vector<double> before;
  for (int id : learner_ids_) before.push_back(world_.robot(id).s);
  auto events = step_world(world_, commands);
  std::vector<double> progress;
  for (std::size_t slot = 0; slot < learner_ids_.size(); ++slot) {
    progress.push_back(std::max(0.0, world_.robot(learner_ids_[slot]).s - before[slot]));
    travelled_[slot] += progress.back();
  }

  StepResult result;
  result.observations = observe();
  result.rewards = reward_adapter(events, learner_ids_, progress, config_.reward, config_.v_max, config_.dt);
  done_ = world_.status != EpisodeStatus::kRunning;
  result.dones.assign(learner_ids_.size(), done_);

  auto& info = result.info;
  info.collisions = std::move(events);
  info.t = world_.t;
  for (const auto& r : world_.robots) {
    info.robot_ids.push_back(r.id);
    info.success.push_back(check_success(world_, r.id));
    info.true_speeds.push_back(r.v);
  }
  for (int id : learner_ids_) {
    info.socially_driven.push_back(randomized_.socially_driven == id);
  }
  return result;
}

}  // namespace coopdrive
