#include "coopdrive/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#ifndef COOPDRIVE_SCENARIO_DIR_DEFAULT
#define COOPDRIVE_SCENARIO_DIR_DEFAULT "scenarios"
#endif

namespace coopdrive {

namespace {

constexpr double kTol = 1e-9;

std::string str(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
Vec2 sub(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = sub(b, a);
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(sub(p, a), ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const Vec2 closest{a.x + t * ab.x, a.y + t * ab.y};
  const Vec2 d = sub(p, closest);
  return std::sqrt(dot(d, d));
}

double cross(Vec2 o, Vec2 a, Vec2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

bool segments_cross(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const double d1 = cross(c, d, a);
  const double d2 = cross(c, d, b);
  const double d3 = cross(a, b, c);
  const double d4 = cross(a, b, d);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

double segment_distance(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  if (segments_cross(a, b, c, d)) return 0.0;
  return std::min({point_segment_distance(a, c, d), point_segment_distance(b, c, d),
                   point_segment_distance(c, a, b), point_segment_distance(d, a, b)});
}

const char* topology_name(Topology t) {
  return t == Topology::kParallelMerge ? "parallel_merge" : "cross_intersection";
}

const char* kind_name(RobotKind k) {
  switch (k) {
    case RobotKind::kLearner: return "learner";
    case RobotKind::kSocial: return "social";
    case RobotKind::kStatic: return "static";
  }
  return "learner";
}

}  // namespace

Vec2 Lane::heading() const {
  return axis == Axis::kX ? Vec2{static_cast<double>(direction), 0.0}
                          : Vec2{0.0, static_cast<double>(direction)};
}

Vec2 Lane::left() const {
  const Vec2 h = heading();
  return {-h.y, h.x};
}

Vec2 Lane::point(double s, double lateral) const {
  const double along = start + direction * s;
  const Vec2 l = left();
  Vec2 p = axis == Axis::kX ? Vec2{along, center_offset} : Vec2{center_offset, along};
  p.x += lateral * l.x;
  p.y += lateral * l.y;
  return p;
}

const Lane& LaneGeometry::lane(int id) const {
  for (const auto& l : lanes) {
    if (l.id == id) return l;
  }
  throw ConfigError("no lane with id " + std::to_string(id));
}

bool LaneGeometry::has_lane(int id) const {
  return std::any_of(lanes.begin(), lanes.end(), [id](const Lane& l) { return l.id == id; });
}

Box LaneGeometry::arena() const {
  Box box{{1e300, 1e300}, {-1e300, -1e300}};
  for (const auto& l : lanes) {
    const double a0 = l.start;
    const double a1 = l.start + l.direction * l.length;
    const double p0 = l.center_offset - 0.5 * l.width;
    const double p1 = l.center_offset + 0.5 * l.width;
    const double xs[2] = {l.axis == Axis::kX ? a0 : p0, l.axis == Axis::kX ? a1 : p1};
    const double ys[2] = {l.axis == Axis::kX ? p0 : a0, l.axis == Axis::kX ? p1 : a1};
    for (double x : xs) {
      box.min.x = std::min(box.min.x, x);
      box.max.x = std::max(box.max.x, x);
    }
    for (double y : ys) {
      box.min.y = std::min(box.min.y, y);
      box.max.y = std::max(box.max.y, y);
    }
  }
  return box;
}

Box LaneGeometry::conflict_zone() const {
  if (topology != Topology::kCrossIntersection) {
    throw ConfigError("conflict zone is only defined for cross_intersection geometry");
  }
  // Lanes along x occupy a band in y and vice versa; the zone is their product.
  Box zone{{1e300, 1e300}, {-1e300, -1e300}};
  for (const auto& l : lanes) {
    const double lo = l.center_offset - 0.5 * l.width;
    const double hi = l.center_offset + 0.5 * l.width;
    if (l.axis == Axis::kX) {
      zone.min.y = std::min(zone.min.y, lo);
      zone.max.y = std::max(zone.max.y, hi);
    } else {
      zone.min.x = std::min(zone.min.x, lo);
      zone.max.x = std::max(zone.max.x, hi);
    }
  }
  return zone;
}

double LaneGeometry::conflict_exit_s(int lane_id) const {
  const Lane& l = lane(lane_id);
  const Box zone = conflict_zone();
  const double lo = l.axis == Axis::kX ? zone.min.x : zone.min.y;
  const double hi = l.axis == Axis::kX ? zone.max.x : zone.max.y;
  const double far_along = l.direction > 0 ? hi : lo;
  return (far_along - l.start) / l.direction;
}

double LaneGeometry::lateral_between(int from, int to) const {
  const Lane& a = lane(from);
  const Lane& b = lane(to);
  const Vec2 pa = a.point(0.0, 0.0);
  const Vec2 pb = b.point(0.0, 0.0);
  return dot(sub(pb, pa), a.left());
}

const RobotSpec& ScenarioConfig::robot(int id) const {
  for (const auto& r : robots) {
    if (r.id == id) return r;
  }
  throw ConfigError("no robot with id " + std::to_string(id));
}

std::vector<int> ScenarioConfig::learner_ids() const {
  std::vector<int> ids;
  for (const auto& r : robots) {
    if (r.kind == RobotKind::kLearner) ids.push_back(r.id);
  }
  return ids;
}

void validate(const ScenarioConfig& c) {
  const bool lane_change = c.name == kLaneChangeScenario;
  const bool cross = c.name == kCrossIntersectionScenario;
  if (!lane_change && !cross) throw UnknownScenario("unknown scenario name '" + c.name + "'");
  const Topology expected = lane_change ? Topology::kParallelMerge : Topology::kCrossIntersection;
  if (c.geometry.topology != expected) {
    throw ConfigError("scenario '" + c.name + "' requires topology " + topology_name(expected));
  }

  const auto& lanes = c.geometry.lanes;
  if (lanes.empty()) throw ConfigError("geometry has no lanes");
  std::set<int> lane_ids;
  for (const auto& l : lanes) {
    if (!lane_ids.insert(l.id).second) throw ConfigError("duplicate lane id " + std::to_string(l.id));
    if (!(l.width > 0.0)) throw ConfigError("lane width must be positive");
    if (!(l.length > 0.0)) throw ConfigError("lane length must be positive");
    if (l.direction != 1 && l.direction != -1) throw ConfigError("lane direction must be +1 or -1");
  }
  for (const auto& l : lanes) {
    if (!l.left_neighbor) continue;
    const int n = *l.left_neighbor;
    if (n == l.id) throw ConfigError("lane " + std::to_string(l.id) + " cannot neighbor itself");
    if (!lane_ids.count(n)) throw ConfigError("left neighbor " + std::to_string(n) + " does not exist");
    const Lane& other = c.geometry.lane(n);
    if (other.axis != l.axis || other.direction != l.direction ||
        std::abs(other.start - l.start) > kTol) {
      throw ConfigError("left neighbor of lane " + std::to_string(l.id) + " is not a parallel lane");
    }
    if (!(c.geometry.lateral_between(l.id, n) > 0.0)) {
      throw ConfigError("left neighbor of lane " + std::to_string(l.id) + " lies to its right");
    }
  }
  if (cross) {
    const bool has_x = std::any_of(lanes.begin(), lanes.end(), [](const Lane& l) { return l.axis == Axis::kX; });
    const bool has_y = std::any_of(lanes.begin(), lanes.end(), [](const Lane& l) { return l.axis == Axis::kY; });
    if (!has_x || !has_y) throw ConfigError("cross_intersection needs lanes on both axes");
    const Box z = c.geometry.conflict_zone();
    if (std::abs((z.max.x - z.min.x) - (z.max.y - z.min.y)) > kTol) {
      throw ConfigError("cross_intersection conflict zone must be square");
    }
  }

  if (c.episode_length < 1) throw ConfigError("episode_length must be at least 1");
  if (!(c.dt > 0.0) || !(c.substep > 0.0)) throw ConfigError("dt and substep must be positive");
  const double ratio = c.dt / c.substep;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 || std::round(ratio) < 1.0) {
    throw ConfigError("substep must divide dt exactly");
  }
  if (!(c.v_max > 0.0)) throw ConfigError("v_max must be positive");
  if (!(c.accel_cap > 0.0)) throw ConfigError("accel_cap must be positive");
  if (!(c.speed_step >= 0.0)) throw ConfigError("speed_step must be nonnegative");
  if (c.speed_step / c.dt > c.accel_cap + kTol) {
    throw ConfigError("speed_step / dt exceeds accel_cap");
  }
  if (c.lane_change_steps < 1) throw ConfigError("lane_change_steps must be at least 1");

  if (!(c.reward.alpha >= 0.0 && c.reward.alpha <= 1.0)) {
    throw ConfigError("reward.alpha must lie in [0,1], got " + str(c.reward.alpha));
  }
  if (!(c.reward.collision_penalty >= 0.0)) throw ConfigError("reward.collision_penalty must be >= 0");

  const auto& rc = c.randomization;
  if (!rc.position_jitter.empty() && rc.position_jitter.size() != c.robots.size()) {
    throw ConfigError("randomization.position_jitter needs one entry per robot");
  }
  for (double j : rc.position_jitter) {
    if (!(j >= 0.0)) throw ConfigError("position jitter must be nonnegative");
  }
  if (!(rc.sensor_noise >= 0.0) || !(rc.speed_noise >= 0.0)) {
    throw ConfigError("noise standard deviations must be nonnegative");
  }
  if (!(rc.social_replacement_prob >= 0.0 && rc.social_replacement_prob <= 1.0)) {
    throw ConfigError("social_replacement_prob must lie in [0,1]");
  }
  if (c.lidar.beams < 1) throw ConfigError("lidar.beams must be at least 1");
  if (!(c.lidar.range > 0.0)) throw ConfigError("lidar.range must be positive");
  try {
    validate(c.social_agent);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  if (c.robots.empty()) throw ConfigError("roster is empty");
  std::set<int> robot_ids;
  for (const auto& r : c.robots) {
    if (!robot_ids.insert(r.id).second) throw ConfigError("duplicate robot id " + std::to_string(r.id));
    if (!lane_ids.count(r.lane)) {
      throw ConfigError("robot " + std::to_string(r.id) + " assigned to nonexistent lane " +
                        std::to_string(r.lane));
    }
    if (!(r.s_min <= r.s_max)) throw ConfigError("robot " + std::to_string(r.id) + " has an empty s range");
    if (!(r.radius > 0.0)) throw ConfigError("robot radius must be positive");
    if (!(r.initial_speed >= 0.0 && r.initial_speed <= c.v_max)) {
      throw ConfigError("robot " + std::to_string(r.id) + " initial speed outside [0, v_max]");
    }
  }
  if (c.learner_ids().empty()) throw ConfigError("roster has no learners");
  for (std::size_t i = 0; i < c.robots.size(); ++i) {
    for (std::size_t j = i + 1; j < c.robots.size(); ++j) {
      const auto& a = c.robots[i];
      const auto& b = c.robots[j];
      const Lane& la = c.geometry.lane(a.lane);
      const Lane& lb = c.geometry.lane(b.lane);
      const double d = segment_distance(la.point(a.s_min, 0), la.point(a.s_max, 0),
                                        lb.point(b.s_min, 0), lb.point(b.s_max, 0));
      if (!(d >= a.radius + b.radius)) {
        throw ConfigError("initial ranges of robots " + std::to_string(a.id) + " and " +
                          std::to_string(b.id) + " can overlap");
      }
    }
  }

  if (lane_change) {
    if (!c.merge_task) throw ConfigError("lane_change scenario needs a merge_task");
    const auto& task = *c.merge_task;
    if (c.robot(task.merging_robot).kind != RobotKind::kLearner) {
      throw ConfigError("merge_task.merging_robot must be a learner");
    }
    c.robot(task.obstacle_robot);
    if (!lane_ids.count(task.target_lane)) throw ConfigError("merge_task.target_lane does not exist");
  }
}

namespace {

Axis parse_axis(const std::string& s) {
  if (s == "x") return Axis::kX;
  if (s == "y") return Axis::kY;
  throw ConfigError("lane axis must be 'x' or 'y', got '" + s + "'");
}

Topology parse_topology(const std::string& s) {
  if (s == "parallel_merge") return Topology::kParallelMerge;
  if (s == "cross_intersection") return Topology::kCrossIntersection;
  throw ConfigError("unknown topology '" + s + "'");
}

RobotKind parse_kind(const std::string& s) {
  if (s == "learner") return RobotKind::kLearner;
  if (s == "social") return RobotKind::kSocial;
  if (s == "static") return RobotKind::kStatic;
  throw ConfigError("unknown robot kind '" + s + "'");
}

ScenarioConfig parse(const nlohmann::json& doc) {
  ScenarioConfig c;
  c.name = doc.at("name").get<std::string>();
  const auto& geo = doc.at("geometry");
  c.geometry.topology = parse_topology(geo.at("topology").get<std::string>());
  for (const auto& l : geo.at("lanes")) {
    Lane lane;
    lane.id = l.at("id").get<int>();
    lane.axis = parse_axis(l.at("axis").get<std::string>());
    lane.direction = l.at("direction").get<int>();
    lane.center_offset = l.at("center_offset").get<double>();
    lane.start = l.at("start").get<double>();
    lane.length = l.at("length").get<double>();
    lane.width = l.at("width").get<double>();
    if (l.contains("left_neighbor") && !l.at("left_neighbor").is_null()) {
      lane.left_neighbor = l.at("left_neighbor").get<int>();
    }
    c.geometry.lanes.push_back(lane);
  }
  for (const auto& r : doc.at("robots")) {
    RobotSpec spec;
    spec.id = r.at("id").get<int>();
    spec.kind = parse_kind(r.at("kind").get<std::string>());
    spec.lane = r.at("lane").get<int>();
    const auto range = r.at("s_range").get<std::vector<double>>();
    if (range.size() != 2) throw ConfigError("s_range must be [min, max]");
    spec.s_min = range[0];
    spec.s_max = range[1];
    spec.initial_speed = r.at("initial_speed").get<double>();
    spec.radius = r.at("radius").get<double>();
    c.robots.push_back(spec);
  }
  c.episode_length = doc.at("episode_length").get<int>();
  c.dt = doc.at("dt").get<double>();
  c.substep = doc.at("substep").get<double>();
  c.v_max = doc.at("v_max").get<double>();
  c.accel_cap = doc.at("accel_cap").get<double>();
  c.speed_step = doc.at("speed_step").get<double>();
  c.lane_change_steps = doc.at("lane_change_steps").get<int>();

  const auto& rw = doc.at("reward");
  c.reward.alpha = rw.at("alpha").get<double>();
  c.reward.collision_penalty = rw.at("collision_penalty").get<double>();
  c.reward.team_mode = rw.at("team_mode").get<bool>();

  const auto& rnd = doc.at("randomization");
  c.randomization.position_jitter = rnd.at("position_jitter").get<std::vector<double>>();
  c.randomization.sensor_noise = rnd.at("sensor_noise").get<double>();
  c.randomization.speed_noise = rnd.at("speed_noise").get<double>();
  c.randomization.social_replacement_prob = rnd.at("social_replacement_prob").get<double>();

  const auto& lidar = doc.at("lidar");
  c.lidar.beams = lidar.at("beams").get<int>();
  c.lidar.range = lidar.at("range").get<double>();

  const auto& sa = doc.at("social_agent");
  c.social_agent.v_f = sa.at("v_f").get<double>();
  c.social_agent.a = sa.at("a").get<double>();
  c.social_agent.b = sa.at("b").get<double>();
  c.social_agent.s0 = sa.at("s0").get<double>();
  c.social_agent.headway = sa.at("headway").get<double>();
  c.social_agent.mu = sa.at("mu").get<double>();
  c.social_agent.sigma = sa.at("sigma").get<double>();

  if (doc.contains("merge_task") && !doc.at("merge_task").is_null()) {
    const auto& mt = doc.at("merge_task");
    c.merge_task = MergeTask{mt.at("merging_robot").get<int>(), mt.at("target_lane").get<int>(),
                             mt.at("obstacle_robot").get<int>()};
  }
  return c;
}

}  // namespace

ScenarioConfig scenario_from_json(const nlohmann::json& doc) {
  ScenarioConfig c;
  try {
    c = parse(doc);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed scenario document: ") + e.what());
  }
  validate(c);
  return c;
}

nlohmann::json scenario_to_json(const ScenarioConfig& c) {
  nlohmann::json lanes = nlohmann::json::array();
  for (const auto& l : c.geometry.lanes) {
    lanes.push_back({{"id", l.id},
                     {"axis", l.axis == Axis::kX ? "x" : "y"},
                     {"direction", l.direction},
                     {"center_offset", l.center_offset},
                     {"start", l.start},
                     {"length", l.length},
                     {"width", l.width},
                     {"left_neighbor", l.left_neighbor ? nlohmann::json(*l.left_neighbor) : nlohmann::json()}});
  }
  nlohmann::json robots = nlohmann::json::array();
  for (const auto& r : c.robots) {
    robots.push_back({{"id", r.id},
                      {"kind", kind_name(r.kind)},
                      {"lane", r.lane},
                      {"s_range", {r.s_min, r.s_max}},
                      {"initial_speed", r.initial_speed},
                      {"radius", r.radius}});
  }
  nlohmann::json doc = {
      {"name", c.name},
      {"geometry", {{"topology", topology_name(c.geometry.topology)}, {"lanes", lanes}}},
      {"robots", robots},
      {"episode_length", c.episode_length},
      {"dt", c.dt},
      {"substep", c.substep},
      {"v_max", c.v_max},
      {"accel_cap", c.accel_cap},
      {"speed_step", c.speed_step},
      {"lane_change_steps", c.lane_change_steps},
      {"reward",
       {{"alpha", c.reward.alpha},
        {"collision_penalty", c.reward.collision_penalty},
        {"team_mode", c.reward.team_mode}}},
      {"randomization",
       {{"position_jitter", c.randomization.position_jitter},
        {"sensor_noise", c.randomization.sensor_noise},
        {"speed_noise", c.randomization.speed_noise},
        {"social_replacement_prob", c.randomization.social_replacement_prob}}},
      {"lidar", {{"beams", c.lidar.beams}, {"range", c.lidar.range}}},
      {"social_agent",
       {{"v_f", c.social_agent.v_f},
        {"a", c.social_agent.a},
        {"b", c.social_agent.b},
        {"s0", c.social_agent.s0},
        {"headway", c.social_agent.headway},
        {"mu", c.social_agent.mu},
        {"sigma", c.social_agent.sigma}}},
  };
  if (c.merge_task) {
    doc["merge_task"] = {{"merging_robot", c.merge_task->merging_robot},
                         {"target_lane", c.merge_task->target_lane},
                         {"obstacle_robot", c.merge_task->obstacle_robot}};
  }
  return doc;
}

void apply_override(nlohmann::json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);

  nlohmann::json* node = &doc;
  std::size_t pos = 0;
  while (pos <= path.size()) {
    const auto dot_pos = path.find('.', pos);
    const std::string key = path.substr(pos, dot_pos == std::string::npos ? std::string::npos : dot_pos - pos);
    if (node->is_object()) {
      if (!node->contains(key)) throw ConfigError("unknown override key '" + path + "'");
      node = &(*node)[key];
    } else if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(key);
      } catch (const std::exception&) {
        throw ConfigError("override path '" + path + "' indexes an array with '" + key + "'");
      }
      if (idx >= node->size()) throw ConfigError("override index out of range in '" + path + "'");
      node = &(*node)[idx];
    } else {
      throw ConfigError("override path '" + path + "' descends into a scalar");
    }
    if (dot_pos == std::string::npos) break;
    pos = dot_pos + 1;
  }

  nlohmann::json value;
  try {
    value = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::parse_error&) {
    value = raw;
  }
  const bool number_slot = node->is_number() && value.is_number();
  const bool same_type = node->type() == value.type();
  const bool fills_null = node->is_null();
  if (!number_slot && !same_type && !fills_null) {
    throw ConfigError("override '" + assignment + "' has the wrong type for '" + path + "'");
  }
  *node = std::move(value);
}

ScenarioCatalog::ScenarioCatalog(std::filesystem::path dir) : dir_(std::move(dir)) {}

ScenarioCatalog ScenarioCatalog::standard() {
  if (const char* env = std::getenv("COOPDRIVE_SCENARIO_DIR"); env != nullptr && *env != '\0') {
    return ScenarioCatalog(env);
  }
  return ScenarioCatalog(COOPDRIVE_SCENARIO_DIR_DEFAULT);
}

std::vector<std::string> ScenarioCatalog::names() const {
  std::vector<std::string> out;
  if (!std::filesystem::is_directory(dir_)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    if (entry.path().extension() == ".json") out.push_back(entry.path().stem().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

nlohmann::json ScenarioCatalog::document(const std::string& name) const {
  const auto path = dir_ / (name + ".json");
  if (name.empty() || name.find('/') != std::string::npos || !std::filesystem::exists(path)) {
    throw UnknownScenario("unknown scenario '" + name + "'");
  }
  std::ifstream in(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
}

ScenarioConfig ScenarioCatalog::load(const std::string& name,
                                     const std::vector<std::string>& overrides) const {
  auto doc = document(name);
  for (const auto& o : overrides) apply_override(doc, o);
  return scenario_from_json(doc);
}

}  // namespace coopdrive
