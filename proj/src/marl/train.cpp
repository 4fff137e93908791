#include "coopdrive/marl/train.hpp"

#include <algorithm>

namespace coopdrive::marl {

std::vector<int> success_eligible(const ScenarioConfig& config) {
  if (config.merge_task) return {config.merge_task->merging_robot};
  return config.learner_ids();
}

EpisodeOutcome play_episode(Env& env, std::uint64_t seed, const ActFn& act, const StepHook& hook) {
  EpisodeOutcome out;
  auto obs = env.reset(seed);
  out.socially_driven = env.socially_driven();
  const auto eligible = success_eligible(env.scenario());
  double reward_sum = 0.0;
  double speed_sum = 0.0;
  StepResult res;
  while (!env.episode_over()) {
    const auto actions = act(obs);
    res = env.step(actions);
    reward_sum += res.rewards.team_reward;
    for (int id : env.learner_ids()) {
      const auto it = std::find(res.info.robot_ids.begin(), res.info.robot_ids.end(), id);
      speed_sum += res.info.true_speeds[static_cast<std::size_t>(it - res.info.robot_ids.begin())];
    }
    if (!res.info.collisions.empty()) out.record.collision = true;
    if (hook) {
      Transition tr;
      tr.observations = std::move(obs);
      tr.actions = actions;
      tr.rewards = res.rewards.r_total;
      tr.team_reward = res.rewards.team_reward;
      tr.next_observations = res.observations;
      tr.done = env.episode_over();
      hook(tr);
    }
    obs = std::move(res.observations);
    ++out.steps;
  }
  const double steps = static_cast<double>(out.steps);
  out.record.mean_step_reward = reward_sum / steps;
  out.record.mean_speed = speed_sum / (steps * static_cast<double>(env.learner_count()));
  int succeeded = 0;
  for (int id : eligible) succeeded += check_success(env.world(), id) ? 1 : 0;
  out.record.success_rate = static_cast<double>(succeeded) / static_cast<double>(eligible.size());
  return out;
}

TrainResult train(Algo algo, Env& env, const Hyperparams& hp, std::uint64_t seed, const ProgressFn& progress) {
  validate(hp);
  if (hp.episode_length > 0 && hp.episode_length != env.scenario().episode_length) {
    auto cfg = env.scenario();
    cfg.episode_length = hp.episode_length;
    env = Env(cfg);
  }
  Rng rng = make_rng(seed, 11);
  Rng episode_seeds = make_rng(seed, 12);
  TrainResult result;
  result.learner = make_learner(algo, env.learner_count(), env.observation_size(), hp, rng);
  Learner& learner = *result.learner;
  result.log.reserve(static_cast<std::size_t>(hp.episodes));

  for (int ep = 0; ep < hp.episodes; ++ep) {
    const double epsilon = learner.uses_epsilon() ? hp.epsilon(ep) : 0.0;
    double critic_sum = 0.0, actor_sum = 0.0;
    int critic_n = 0, actor_n = 0;
    auto tally = [&](const Learner::Losses& l) {
      if (l.critic) {
        critic_sum += *l.critic;
        ++critic_n;
      }
      if (l.actor) {
        actor_sum += *l.actor;
        ++actor_n;
      }
    };
    auto outcome = play_episode(
        env, episode_seeds(), [&](const std::vector<Observation>& obs) { return learner.explore(obs, epsilon, rng); },
        [&](const Transition& tr) { tally(learner.observe(tr, rng)); });
    tally(learner.end_episode(rng));

    auto& rec = outcome.record;
    rec.episode = ep;
    rec.epsilon = epsilon;
    rec.loss_critic = critic_n > 0 ? critic_sum / critic_n : kNoLoss;
    rec.loss_actor = actor_n > 0 ? actor_sum / actor_n : kNoLoss;
    result.log.push_back(rec);
    if (progress) progress(rec);
  }
  return result;
}

}  // namespace coopdrive::marl
