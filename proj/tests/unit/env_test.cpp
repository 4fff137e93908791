#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "coopdrive/env.hpp"
#include "test_worlds.hpp"

namespace coopdrive {
namespace {

std::vector<int> repeat(int action, std::size_t n) { return std::vector<int>(n, action); }

TEST(EnvMakeTest, LaneChangeHasTwoLearners) {
  auto env = Env::make("lane_change");
  env.reset(0);
  EXPECT_EQ(env.world().robots.size(), 3u);
  EXPECT_EQ(env.learner_count(), 2u);
  EXPECT_EQ(env.learner_ids(), (std::vector<int>{1, 2}));
}

TEST(EnvMakeTest, CrossWithOverride) {
  auto env = Env::make("cross_intersection", {"episode_length=24"});
  EXPECT_EQ(env.learner_count(), 4u);
  EXPECT_EQ(env.scenario().episode_length, 24);
}

TEST(EnvMakeTest, Errors) {
  EXPECT_THROW(Env::make("nonexistent"), UnknownScenario);
  EXPECT_THROW(Env::make("lane_change", {"reward.alpha=1.5"}), ConfigError);
  EXPECT_THROW(Env::make("lane_change", {"reward.not_a_key=1"}), ConfigError);
  EXPECT_THROW(Env::make("lane_change", {"episode_length"}), ConfigError);
}

TEST(EnvResetTest, SeededResetIsReproducible) {
  auto env = Env::make("lane_change");
  const auto a = env.reset(42);
  const auto b = env.reset(42);
  EXPECT_EQ(a, b);
  ASSERT_EQ(a.size(), 2u);
  for (const auto& o : a) EXPECT_EQ(o.size(), env.observation_size());
  EXPECT_EQ(env.observation_size(), 18u);
}

TEST(EnvResetTest, UnseededResetsCountUp) {
  auto env = Env::make("lane_change");
  env.reset();
  EXPECT_EQ(env.last_seed(), 0u);
  env.reset();
  EXPECT_EQ(env.last_seed(), 1u);
  env.reset(10);
  env.reset();
  EXPECT_EQ(env.last_seed(), 11u);
}

TEST(EnvResetTest, ZeroJitterKeepsSampledPlacement) {
  auto cfg = ScenarioCatalog::standard().load("lane_change");
  cfg.randomization.position_jitter = {0.0, 0.0, 0.0};
  Env env(cfg);
  env.reset(5);
  EXPECT_EQ(env.world(), load_scenario(cfg, 5));
}

TEST(EnvStepTest, NonTerminalStep) {
  auto env = Env::make("lane_change");
  env.reset(1);
  const auto res = env.step(repeat(1, 2));
  EXPECT_EQ(res.dones, (std::vector<bool>{false, false}));
  EXPECT_EQ(res.info.t, 1);
  EXPECT_EQ(res.observations.size(), 2u);
  EXPECT_TRUE(res.info.collisions.empty());
}

TEST(EnvStepTest, HorizonEndsEpisode) {
  auto env = Env::make("cross_intersection");
  env.reset(1);
  StepResult res;
  int steps = 0;
  while (!env.episode_over()) {
    res = env.step(repeat(0, 4));
    ++steps;
  }
  EXPECT_EQ(steps, 24);
  EXPECT_EQ(res.dones, std::vector<bool>(4, true));
  for (double c : res.rewards.r_col) EXPECT_EQ(c, 0.0);
}

TEST(EnvStepTest, CollisionEndsEpisodeAndPenalizes) {
  auto env = Env::make("lane_change");
  env.reset(3);
  StepResult res;
  // Slot 1 is the merging robot; it speeds straight into the static obstacle.
  while (!env.episode_over()) res = env.step(std::vector<int>{1, 2});
  ASSERT_FALSE(res.info.collisions.empty());
  EXPECT_EQ(res.info.collisions[0].robot_a, 2);
  EXPECT_EQ(res.info.collisions[0].robot_b, 3);
  EXPECT_EQ(res.dones, (std::vector<bool>{true, true}));
  EXPECT_EQ(res.rewards.r_col[1], -1.0);
  EXPECT_EQ(res.rewards.r_col[0], 0.0);
  EXPECT_LT(env.steps_taken(), 18);
}

TEST(EnvStepTest, ContractErrors) {
  auto env = Env::make("lane_change");
  EXPECT_THROW(env.step(repeat(1, 2)), SimError);
  env.reset(0);
  EXPECT_THROW(env.step(repeat(1, 3)), SimError);
  EXPECT_THROW(env.step(std::vector<int>{1, 7}), std::out_of_range);
  while (!env.episode_over()) env.step(repeat(1, 2));
  EXPECT_THROW(env.step(repeat(1, 2)), SimError);
}

TEST(EnvStepTest, RewardIdentityAndTeamMode) {
  auto env = Env::make("cross_intersection");
  Rng rng = make_rng(9);
  for (int ep = 0; ep < 20; ++ep) {
    env.reset(ep);
    while (!env.episode_over()) {
      std::vector<int> acts(4);
      for (int& a : acts) a = uniform_int(rng, 0, 3);
      const auto res = env.step(acts);
      const auto& rr = res.rewards;
      const double alpha = env.scenario().reward.alpha;
      double sum = 0.0;
      for (std::size_t i = 0; i < rr.r_total.size(); ++i) {
        ASSERT_EQ(rr.r_total[i] - (alpha * rr.r_col[i] + (1 - alpha) * rr.r_travel[i]), 0.0);
        ASSERT_GE(rr.r_travel[i], 0.0);
        ASSERT_LE(rr.r_travel[i], 1.0);
        sum += rr.r_total[i];
      }
      EXPECT_NEAR(rr.team_reward, sum / 4.0, 1e-15);
      for (double r : rr.rewards(true)) ASSERT_EQ(r, rr.team_reward);
      EXPECT_EQ(rr.rewards(false), rr.r_total);
    }
  }
}

TEST(EnvStepTest, EndToEndDeterminism) {
  auto cfg = ScenarioCatalog::standard().load("lane_change");
  cfg.randomization.sensor_noise = 0.01;
  cfg.randomization.speed_noise = 0.01;
  cfg.randomization.social_replacement_prob = 0.5;
  Env a(cfg), b(cfg);
  Rng rng = make_rng(4);
  for (int ep = 0; ep < 10; ++ep) {
    ASSERT_EQ(a.reset(ep), b.reset(ep));
    while (!a.episode_over()) {
      std::vector<int> acts{uniform_int(rng, 0, 3), uniform_int(rng, 0, 3)};
      const auto ra = a.step(acts);
      const auto rb = b.step(acts);
      ASSERT_EQ(ra.observations, rb.observations);
      ASSERT_EQ(ra.rewards.r_total, rb.rewards.r_total);
      ASSERT_EQ(ra.dones, rb.dones);
    }
  }
}

TEST(StateAdapterTest, Concatenates) {
  const std::vector<double> lidar{3.5, 3.5, 3.5, 3.5};
  EXPECT_EQ(state_adapter(lidar, 0.2, 1, 4, 3.5), (Observation{3.5, 3.5, 3.5, 3.5, 0.2, 1.0}));
}

TEST(StateAdapterTest, ClipsToFloorAndRange) {
  const std::vector<double> lidar{0.0, 9.0};
  const auto obs = state_adapter(lidar, 0.0, 0, 2, 3.5);
  EXPECT_EQ(obs[0], 0.001);
  EXPECT_EQ(obs[1], 3.5);
}

TEST(StateAdapterTest, LengthMismatchThrows) {
  const std::vector<double> lidar{1.0, 1.0, 1.0};
  EXPECT_THROW(state_adapter(lidar, 0.0, 0, 4, 3.5), std::invalid_argument);
}

TEST(ActionAdapterTest, MappingTable) {
  EXPECT_EQ(action_adapter(1, 0.05, 0.5), (MotionCommand{0.0, false}));
  const auto up = action_adapter(2, 0.05, 0.5);
  EXPECT_NEAR(up.accel, 0.1, 1e-15);
  EXPECT_FALSE(up.lane_change_request);
  EXPECT_NEAR(action_adapter(0, 0.05, 0.5).accel, -0.1, 1e-15);
  EXPECT_EQ(action_adapter(3, 0.05, 0.5), (MotionCommand{0.0, true}));
  EXPECT_THROW(action_adapter(4, 0.05, 0.5), std::out_of_range);
  EXPECT_THROW(action_adapter(-1, 0.05, 0.5), std::out_of_range);
  EXPECT_THROW(one_hot(4), std::out_of_range);
  EXPECT_EQ(one_hot(2), (std::array<double, 4>{0, 0, 1, 0}));
}

TEST(RewardAdapterTest, WorkedExamples) {
  const RewardParams params;  // alpha 0.5
  const std::vector<int> ids{1};
  const std::vector<CollisionEvent> hit{{1, 2, 3}};
  const std::vector<double> none{0.0};
  EXPECT_DOUBLE_EQ(reward_adapter(hit, ids, none, params, 0.26, 0.5).r_total[0], -0.5);
  const std::vector<double> full{0.26 * 0.5};
  EXPECT_DOUBLE_EQ(reward_adapter({}, ids, full, params, 0.26, 0.5).r_total[0], 0.5);
  RewardParams only_safety = params;
  only_safety.alpha = 1.0;
  const std::vector<double> some{0.07};
  EXPECT_EQ(reward_adapter({}, ids, some, only_safety, 0.26, 0.5).r_total[0], 0.0);
}

TEST(RandomizationTest, AllZeroConfigIsIdentity) {
  const auto cfg = ScenarioCatalog::standard().load("lane_change");
  auto w = load_scenario(cfg, 2);
  const auto before = w;
  Rng rng = make_rng(1);
  const Rng rng_before = rng;
  const auto out = apply_randomization(w, RandomizationConfig{}, rng);
  EXPECT_EQ(w, before);
  EXPECT_TRUE(out.noise.is_identity());
  EXPECT_FALSE(out.socially_driven.has_value());
  EXPECT_EQ(rng, rng_before);
}

TEST(RandomizationTest, SensorNoiseReplaysSeededDraws) {
  auto cfg = ScenarioCatalog::standard().load("lane_change");
  cfg.randomization.sensor_noise = 0.01;
  Env env(cfg);
  const auto obs = env.reset(77);
  Rng replay = make_rng(77, 1);
  for (std::size_t slot = 0; slot < 2; ++slot) {
    const auto truth = raycast_lidar(env.world(), env.learner_ids()[slot], 16, 3.5);
    for (std::size_t k = 0; k < truth.size(); ++k) {
      const double expected = std::clamp(truth[k] + 0.01 * standard_normal(replay), 1e-3, 3.5);
      EXPECT_EQ(obs[slot][k], expected);
    }
    EXPECT_EQ(obs[slot][16], env.world().robot(env.learner_ids()[slot]).v);
  }
}

TEST(RandomizationTest, ReplacementProbabilityOneSwapsExactlyOneLearner) {
  auto env = Env::make("cross_intersection");
  env.set_social_replacement(1.0);
  std::set<int> chosen;
  for (int ep = 0; ep < 40; ++ep) {
    env.reset(ep);
    int social = 0;
    for (const auto& r : env.world().robots) social += r.kind == RobotKind::kSocial;
    EXPECT_EQ(social, 1);
    ASSERT_TRUE(env.socially_driven().has_value());
    chosen.insert(*env.socially_driven());
    const auto res = env.step(repeat(1, 4));
    EXPECT_EQ(std::count(res.info.socially_driven.begin(), res.info.socially_driven.end(), true), 1);
  }
  EXPECT_GT(chosen.size(), 1u);
  EXPECT_THROW(env.set_social_replacement(1.5), ConfigError);
}

TEST(RandomizationTest, ReplacedLearnerIgnoresItsAction) {
  auto env = Env::make("lane_change");
  env.set_social_replacement(1.0);
  env.reset(0);
  const int social_id = *env.socially_driven();
  const std::size_t slot = social_id == env.learner_ids()[0] ? 0 : 1;
  auto twin = env;
  std::vector<int> a{1, 1}, b{1, 1};
  b[slot] = 2;
  const auto ra = env.step(a);
  const auto rb = twin.step(b);
  EXPECT_EQ(ra.observations, rb.observations);
}

TEST(RandomizationTest, JitterStaysInRangeAndCollisionFree) {
  const auto cfg = ScenarioCatalog::standard().load("lane_change");
  RandomizationConfig rc;
  rc.position_jitter = {0.05, 0.05, 0.0};
  for (int seed = 0; seed < 50; ++seed) {
    auto w = load_scenario(cfg, seed);
    const auto base = w;
    Rng rng = make_rng(seed, 1);
    apply_randomization(w, rc, rng);
    EXPECT_TRUE(detect_collisions(w).empty());
    for (std::size_t i = 0; i < w.robots.size(); ++i) {
      EXPECT_LE(std::abs(w.robots[i].s - base.robots[i].s), 0.05);
    }
    EXPECT_EQ(w.robot(3).s, base.robot(3).s);
  }
}

TEST(RandomizationTest, ImpossiblePlacementThrows) {
  using testing::robot;
  auto w = testing::make_world(testing::merge_lanes(),
                               {robot(1, RobotKind::kLearner, 0, 0.5), robot(2, RobotKind::kLearner, 0, 0.6)});
  RandomizationConfig rc;
  rc.position_jitter = {1e-6, 1e-6};
  Rng rng = make_rng(0);
  EXPECT_THROW(apply_randomization(w, rc, rng), RandomizationError);
}

}  // namespace
}  // namespace coopdrive
