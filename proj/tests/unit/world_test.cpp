#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "coopdrive/world.hpp"
#include "test_worlds.hpp"

namespace coopdrive {
namespace {

using testing::make_world;
using testing::merge_lanes;
using testing::robot;
using testing::x_lane;

ScenarioConfig shipped(const std::string& name) { return ScenarioCatalog::standard().load(name); }

std::vector<std::optional<MotionCommand>> commands_for(const WorldState& w, MotionCommand cmd) {
  std::vector<std::optional<MotionCommand>> out(w.robots.size());
  for (std::size_t i = 0; i < w.robots.size(); ++i) {
    if (w.robots[i].kind != RobotKind::kStatic) out[i] = cmd;
  }
  return out;
}

TEST(LoadScenarioTest, LaneChangeHasStaticThirdRobot) {
  const auto w = load_scenario(shipped("lane_change"), 42);
  ASSERT_EQ(w.robots.size(), 3u);
  EXPECT_EQ(w.robot(3).kind, RobotKind::kStatic);
  EXPECT_EQ(w.robot(3).v, 0.0);
  EXPECT_EQ(w.t, 0);
  EXPECT_EQ(w.status, EpisodeStatus::kRunning);
}

TEST(LoadScenarioTest, CrossIntersectionHasOneRobotPerArm) {
  const auto w = load_scenario(shipped("cross_intersection"), 7);
  ASSERT_EQ(w.robots.size(), 4u);
  std::set<int> lanes;
  std::set<std::pair<int, int>> headings;
  for (const auto& r : w.robots) {
    lanes.insert(r.lane);
    const auto h = w.geometry.lane(r.lane).heading();
    headings.insert({static_cast<int>(h.x), static_cast<int>(h.y)});
  }
  EXPECT_EQ(lanes.size(), 4u);
  EXPECT_EQ(headings.size(), 4u);
}

TEST(LoadScenarioTest, PlacementRespectsRangesAndSeed) {
  const auto cfg = shipped("lane_change");
  const auto a = load_scenario(cfg, 42);
  const auto b = load_scenario(cfg, 42);
  EXPECT_EQ(a, b);
  for (int seed = 0; seed < 50; ++seed) {
    const auto w = load_scenario(cfg, seed);
    for (const auto& spec : cfg.robots) {
      EXPECT_GE(w.robot(spec.id).s, spec.s_min);
      EXPECT_LE(w.robot(spec.id).s, spec.s_max);
    }
    EXPECT_TRUE(detect_collisions(w).empty());
  }
}

TEST(LoadScenarioTest, RejectsUnknownNameAndBadLane) {
  auto cfg = shipped("lane_change");
  cfg.name = "roundabout";
  EXPECT_THROW(load_scenario(cfg, 1), UnknownScenario);
  cfg = shipped("lane_change");
  cfg.robots[0].lane = 9;
  EXPECT_THROW(load_scenario(cfg, 1), ConfigError);
}

TEST(LoadScenarioTest, RejectsOverlappingInitialRanges) {
  auto cfg = shipped("lane_change");
  cfg.robots[1].s_max = 0.95;  // merging robot range reaches the static obstacle
  EXPECT_THROW(validate(cfg), ConfigError);
}

TEST(StepWorldTest, ConstantVelocityIntegration) {
  auto w = make_world(merge_lanes(), {robot(1, RobotKind::kLearner, 0, 0.5, 0.2)});
  const auto events = step_world(w, commands_for(w, {0.0, false}));
  EXPECT_TRUE(events.empty());
  EXPECT_NEAR(w.robot(1).s, 0.6, 1e-12);
  EXPECT_EQ(w.t, 1);
}

TEST(StepWorldTest, SpeedClampsAtZero) {
  auto w = make_world(merge_lanes(), {robot(1, RobotKind::kLearner, 0, 0.5, 0.0)});
  step_world(w, commands_for(w, {-0.1, false}));
  EXPECT_EQ(w.robot(1).v, 0.0);
  EXPECT_EQ(w.robot(1).s, 0.5);
}

TEST(StepWorldTest, SpeedClampsAtVmax) {
  auto w = make_world(merge_lanes(), {robot(1, RobotKind::kLearner, 0, 0.5, 0.25)});
  step_world(w, commands_for(w, {0.5, false}));
  EXPECT_EQ(w.robot(1).v, w.params.v_max);
}

TEST(StepWorldTest, LaneChangeInterpolatesOverLSteps) {
  auto w = make_world(merge_lanes(), {robot(1, RobotKind::kLearner, 0, 0.5, 0.0)});
  ASSERT_EQ(w.params.lane_change_steps, 4);
  // Lane centers are 0.25 m apart, so the lateral offset grows 0.0625 m per step.
  const double expected[] = {0.0625, 0.125, 0.1875};
  step_world(w, commands_for(w, {0.0, true}));
  EXPECT_NEAR(w.robot(1).lateral, expected[0], 1e-12);
  EXPECT_DOUBLE_EQ(w.robot(1).lane_change->progress(), 0.25);
  for (int k = 1; k < 3; ++k) {
    step_world(w, commands_for(w, {0.0, false}));
    EXPECT_NEAR(w.robot(1).lateral, expected[k], 1e-12);
    EXPECT_EQ(w.robot(1).lane_flag, 0);
  }
  step_world(w, commands_for(w, {0.0, false}));
  EXPECT_EQ(w.robot(1).lane_flag, 1);
  EXPECT_EQ(w.robot(1).lane, 1);
  EXPECT_EQ(w.robot(1).lateral, 0.0);
  EXPECT_FALSE(w.robot(1).lane_change.has_value());
  EXPECT_DOUBLE_EQ(w.position(w.robot(1)).y, 0.375);

  // Already in the leftmost lane: further requests are no-ops.
  step_world(w, commands_for(w, {0.0, true}));
  EXPECT_EQ(w.robot(1).lane_flag, 1);
  EXPECT_FALSE(w.robot(1).lane_change.has_value());
  EXPECT_DOUBLE_EQ(w.position(w.robot(1)).y, 0.375);
}

TEST(StepWorldTest, RequestDuringManeuverIsIgnored) {
  auto w = make_world(merge_lanes(), {robot(1, RobotKind::kLearner, 0, 0.5, 0.0)});
  step_world(w, commands_for(w, {0.0, true}));
  step_world(w, commands_for(w, {0.0, true}));
  EXPECT_EQ(w.robot(1).lane_change->steps_done, 2);
}

TEST(StepWorldTest, ContractViolationsThrow) {
  auto w = make_world(merge_lanes(), {robot(1, RobotKind::kLearner, 0, 0.2, 0.1),
                                      robot(2, RobotKind::kStatic, 1, 1.0)});
  std::vector<std::optional<MotionCommand>> static_cmd{MotionCommand{}, MotionCommand{}};
  EXPECT_THROW(step_world(w, static_cmd), SimError);
  std::vector<std::optional<MotionCommand>> missing{std::nullopt, std::nullopt};
  EXPECT_THROW(step_world(w, missing), SimError);
  std::vector<std::optional<MotionCommand>> too_hard{MotionCommand{5.0, false}, std::nullopt};
  EXPECT_THROW(step_world(w, too_hard), SimError);
  w.status = EpisodeStatus::kDone;
  EXPECT_THROW(step_world(w, commands_for(w, {})), SimError);
}

TEST(StepWorldTest, EpisodeEndsExactlyAtHorizon) {
  auto w = load_scenario(shipped("cross_intersection"), 3);
  const auto cmds = commands_for(w, {-0.1, false});  // everyone brakes to a stop
  int steps = 0;
  while (w.status == EpisodeStatus::kRunning) {
    step_world(w, cmds);
    ++steps;
  }
  EXPECT_EQ(w.status, EpisodeStatus::kDone);
  EXPECT_EQ(steps, 24);
}

TEST(StepWorldTest, CollisionLatchesStatus) {
  auto w = make_world(merge_lanes(), {robot(1, RobotKind::kLearner, 0, 0.82, 0.26),
                                      robot(2, RobotKind::kStatic, 0, 1.0)});
  const auto events = step_world(w, commands_for(w, {0.0, false}));
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0], (CollisionEvent{1, 2, 1}));
  EXPECT_EQ(w.status, EpisodeStatus::kCollided);
  EXPECT_EQ(detect_collisions(w), events);
  EXPECT_THROW(step_world(w, commands_for(w, {})), SimError);
}

TEST(DetectCollisionsTest, SeparatedRobotsDoNotCollide) {
  auto w = make_world(merge_lanes(), {robot(1, RobotKind::kLearner, 0, 0.5),
                                      robot(2, RobotKind::kLearner, 0, 0.8)});
  EXPECT_TRUE(detect_collisions(w).empty());
}

TEST(DetectCollisionsTest, CoincidentRobotsCollideOnce) {
  auto w = make_world(merge_lanes(), {robot(4, RobotKind::kLearner, 0, 0.5),
                                      robot(2, RobotKind::kLearner, 0, 0.5)});
  const auto events = detect_collisions(w);
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0].robot_a, 2);
  EXPECT_EQ(events[0].robot_b, 4);
}

TEST(DetectCollisionsTest, SquareCornersReportOnlyAdjacentPairs) {
  // Side 0.15 < 0.16 but diagonal 0.212 > 0.16.
  const double side = 0.15;
  auto w = make_world({x_lane(0, 0.0, 10.0, 10.0)},
                      {robot(1, RobotKind::kLearner, 0, 1.0, 0, 0.0), robot(2, RobotKind::kLearner, 0, 1.0 + side, 0, 0.0),
                       robot(3, RobotKind::kLearner, 0, 1.0 + side, 0, side), robot(4, RobotKind::kLearner, 0, 1.0, 0, side)});
  const auto events = detect_collisions(w);
  std::set<std::pair<int, int>> pairs;
  for (const auto& e : events) pairs.insert({e.robot_a, e.robot_b});
  EXPECT_EQ(pairs, (std::set<std::pair<int, int>>{{1, 2}, {2, 3}, {3, 4}, {1, 4}}));
}

// Independent all-pairs oracle using the x-lane position formula directly.
std::set<std::pair<int, int>> brute_force_pairs(const WorldState& w) {
  std::set<std::pair<int, int>> out;
  for (const auto& a : w.robots) {
    for (const auto& b : w.robots) {
      if (a.id >= b.id) continue;
      const double ax = a.s, ay = w.geometry.lane(a.lane).center_offset + a.lateral;
      const double bx = b.s, by = w.geometry.lane(b.lane).center_offset + b.lateral;
      if (std::hypot(ax - bx, ay - by) < a.radius + b.radius) out.insert({a.id, b.id});
    }
  }
  return out;
}

TEST(DetectCollisionsTest, MatchesBruteForceOnRandomLayouts) {
  Rng rng = make_rng(77);
  std::uniform_real_distribution<double> pos(0.0, 1.0);
  std::uniform_real_distribution<double> lat(-0.2, 0.2);
  std::uniform_real_distribution<double> rad(0.03, 0.12);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<RobotState> robots;
    for (int id = 0; id < 6; ++id) {
      robots.push_back(robot(id, RobotKind::kLearner, id % 2, pos(rng), 0, lat(rng), rad(rng)));
    }
    const auto w = make_world(merge_lanes(), robots);
    std::set<std::pair<int, int>> got;
    for (const auto& e : detect_collisions(w)) got.insert({e.robot_a, e.robot_b});
    EXPECT_EQ(got, brute_force_pairs(w));
  }
}

TEST(StepWorldTest, RandomCommandsKeepSpeedBoundsAndDeterminism) {
  const auto cfg = shipped("lane_change");
  Rng cmd_rng = make_rng(5);
  std::uniform_real_distribution<double> accel(-cfg.accel_cap, cfg.accel_cap);
  for (int episode = 0; episode < 30; ++episode) {
    auto a = load_scenario(cfg, episode);
    auto b = load_scenario(cfg, episode);
    while (a.status == EpisodeStatus::kRunning) {
      std::vector<std::optional<MotionCommand>> cmds(a.robots.size());
      for (std::size_t i = 0; i < a.robots.size(); ++i) {
        if (a.robots[i].kind != RobotKind::kStatic) cmds[i] = MotionCommand{accel(cmd_rng), uniform01(cmd_rng) < 0.2};
      }
      const auto ea = step_world(a, cmds);
      const auto eb = step_world(b, cmds);
      ASSERT_EQ(a, b);
      ASSERT_EQ(ea, eb);
      for (const auto& r : a.robots) {
        ASSERT_GE(r.v, 0.0);
        ASSERT_LE(r.v, cfg.v_max);
      }
    }
    if (a.status == EpisodeStatus::kDone) {
      EXPECT_EQ(a.t, cfg.episode_length);
    }
  }
}

TEST(LidarTest, LoneRobotSeesMaxRange) {
  auto w = make_world({x_lane(0, 0.0, 100.0, 100.0)}, {robot(1, RobotKind::kLearner, 0, 50.0)});
  const auto beams = raycast_lidar(w, 1, 16, 3.5);
  ASSERT_EQ(beams.size(), 16u);
  for (double d : beams) EXPECT_EQ(d, 3.5);
}

TEST(LidarTest, ObstacleDeadAheadIsAnalyticDistance) {
  auto w = make_world({x_lane(0, 0.0, 100.0, 100.0)},
                      {robot(1, RobotKind::kLearner, 0, 50.0), robot(2, RobotKind::kStatic, 0, 51.0)});
  const auto beams = raycast_lidar(w, 1, 8, 3.5);
  EXPECT_NEAR(beams[0], 0.92, 1e-12);
  EXPECT_EQ(beams[4], 3.5);
}

TEST(LidarTest, WallsAreVisible) {
  auto w = make_world(merge_lanes(), {robot(1, RobotKind::kLearner, 0, 1.0)});
  const auto beams = raycast_lidar(w, 1, 4, 3.5);
  EXPECT_NEAR(beams[0], 1.6, 1e-12);    // ahead to the far lane end
  EXPECT_NEAR(beams[1], 0.375, 1e-12);  // left to the outer edge of lane 1
  EXPECT_NEAR(beams[2], 1.0, 1e-12);
  EXPECT_NEAR(beams[3], 0.125, 1e-12);
}

TEST(LidarTest, MirrorSymmetricObstaclesGiveMirroredScan) {
  auto w = make_world({x_lane(0, 0.0, 100.0, 100.0)},
                      {robot(1, RobotKind::kLearner, 0, 50.0), robot(2, RobotKind::kStatic, 0, 50.4, 0, 0.3),
                       robot(3, RobotKind::kStatic, 0, 50.4, 0, -0.3)});
  for (int k_total : {7, 16, 33}) {
    const auto beams = raycast_lidar(w, 1, k_total, 3.5);
    for (int k = 1; k < k_total; ++k) EXPECT_EQ(beams[k], beams[k_total - k]) << k_total << " " << k;
  }
}

TEST(LidarTest, ReadingsStayWithinBounds) {
  const auto cfg = shipped("cross_intersection");
  for (int seed = 0; seed < 20; ++seed) {
    auto w = load_scenario(cfg, seed);
    while (w.status == EpisodeStatus::kRunning) {
      for (const auto& r : w.robots) {
        for (double d : raycast_lidar(w, r.id, 16, 3.5)) {
          ASSERT_GT(d, 0.0);
          ASSERT_LE(d, 3.5);
        }
      }
      step_world(w, commands_for(w, {0.1, false}));
    }
  }
  auto w = load_scenario(cfg, 0);
  EXPECT_THROW(raycast_lidar(w, 99, 8, 3.5), SimError);
}

TEST(SuccessTest, MergingRobotPastObstacleInTargetLane) {
  auto w = load_scenario(shipped("lane_change"), 1);
  auto& merger = w.robot(2);
  merger.lane = 1;
  merger.lane_flag = 1;
  merger.s = w.robot(3).s + 0.2;
  EXPECT_TRUE(check_success(w, 2));
  merger.lane_flag = 0;
  merger.lane = 0;
  EXPECT_FALSE(check_success(w, 2));
  EXPECT_FALSE(check_success(w, 3));
  EXPECT_TRUE(check_success(w, 1));
}

TEST(SuccessTest, CollisionPrecludesSuccess) {
  auto w = load_scenario(shipped("lane_change"), 1);
  auto& merger = w.robot(2);
  merger.lane = 1;
  merger.lane_flag = 1;
  merger.s = w.robot(3).s + 0.2;
  w.collided = {1, 2};
  EXPECT_FALSE(check_success(w, 2));
  EXPECT_FALSE(check_success(w, 1));
}

TEST(SuccessTest, CrossRobotMustClearConflictZone) {
  auto w = load_scenario(shipped("cross_intersection"), 1);
  for (const auto& r : w.robots) {
    // Conflict zone spans +-0.25 m around the origin; lanes start 1.3 m out.
    EXPECT_NEAR(w.geometry.conflict_exit_s(r.lane), 1.55, 1e-12);
  }
  auto& r1 = w.robot(1);
  r1.s = 1.55 + 0.01;
  EXPECT_TRUE(check_success(w, 1));
  r1.s = 1.55 - 0.01;
  EXPECT_FALSE(check_success(w, 1));
  EXPECT_THROW(check_success(w, 42), SimError);
}

}  // namespace
}  // namespace coopdrive
