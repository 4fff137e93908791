#pragma once

#include <vector>

#include "coopdrive/scenario.hpp"
#include "coopdrive/world.hpp"

namespace coopdrive::testing {

inline Lane x_lane(int id, double center, double length = 2.6, double width = 0.25,
                   std::optional<int> left = std::nullopt) {
  Lane l;
  l.id = id;
  l.axis = Axis::kX;
  l.direction = 1;
  l.center_offset = center;
  l.start = 0.0;
  l.length = length;
  l.width = width;
  l.left_neighbor = left;
  return l;
}

inline RobotState robot(int id, RobotKind kind, int lane, double s, double v = 0.0,
                        double lateral = 0.0, double radius = 0.08) {
  RobotState r;
  r.id = id;
  r.kind = kind;
  r.lane = lane;
  r.lane_flag = lane;
  r.s = s;
  r.v = v;
  r.lateral = lateral;
  r.radius = radius;
  return r;
}

/// Hand-built world bypassing scenario files.
inline WorldState make_world(std::vector<Lane> lanes, std::vector<RobotState> robots,
                             Topology topology = Topology::kParallelMerge) {
  WorldState w;
  w.geometry.topology = topology;
  w.geometry.lanes = std::move(lanes);
  w.robots = std::move(robots);
  w.rng = make_rng(0);
  return w;
}

/// Two parallel lanes (0 right, 1 left) of the default merge geometry.
inline std::vector<Lane> merge_lanes() {
  return {x_lane(0, 0.125, 2.6, 0.25, 1), x_lane(1, 0.375)};
}

}  // namespace coopdrive::testing
