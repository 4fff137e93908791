#include "coopdrive/harness/metrics.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace coopdrive::harness {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& field, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (field.empty() || end != field.c_str() + field.size()) {
    throw std::runtime_error("metrics CSV line " + std::to_string(line) + ": bad number '" + field + "'");
  }
  return v;
}

}  // namespace

MetricsRecord compute_metrics(std::span<const EpisodeRecord> records) {
  if (records.empty()) throw std::invalid_argument("compute_metrics needs at least one episode");
  MetricsRecord m;
  for (const auto& r : records) {
    m.mean_episode_reward += r.mean_step_reward;
    m.collision_rate += r.collision ? 1.0 : 0.0;
    m.success_rate += r.success_rate;
    m.mean_speed += r.mean_speed;
  }
  const double n = static_cast<double>(records.size());
  m.mean_episode_reward /= n;
  m.collision_rate /= n;
  m.success_rate /= n;
  m.mean_speed /= n;
  m.episodes = records.size();
  return m;
}

nlohmann::json metrics_to_json(const MetricsRecord& m) {
  return {{"episodes", m.episodes},
          {"mean_episode_reward", m.mean_episode_reward},
          {"collision_rate", m.collision_rate},
          {"success_rate", m.success_rate},
          {"mean_speed", m.mean_speed}};
}

std::filesystem::path summary_path_for(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".summary.json");
  return p;
}

std::filesystem::path export_metrics(std::span<const EpisodeRecord> log, const std::filesystem::path& csv_path) {
  const auto summary = compute_metrics(log);
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + csv_path.string());
  out << kCsvHeader << '\n';
  for (const auto& r : log) {
    out << r.episode << ',' << fmt(r.mean_step_reward) << ',' << (r.collision ? 1 : 0) << ',' << fmt(r.success_rate)
        << ',' << fmt(r.mean_speed) << ',' << fmt(r.epsilon) << ',' << fmt(r.loss_critic) << ','
        << fmt(r.loss_actor) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + csv_path.string());

  const auto json_path = summary_path_for(csv_path);
  std::ofstream js(json_path, std::ios::binary);
  if (!js) throw std::runtime_error("cannot write " + json_path.string());
  js << metrics_to_json(summary).dump(2) << '\n';
  return json_path;
}

TrainingLog read_metrics_csv(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot read " + csv_path.string());
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw std::runtime_error(csv_path.string() + " does not start with the metrics header");
  }
  TrainingLog log;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != 8) {
      throw std::runtime_error("metrics CSV line " + std::to_string(line_no) + " has " +
                               std::to_string(fields.size()) + " fields");
    }
    EpisodeRecord r;
    r.episode = static_cast<int>(parse_double(fields[0], line_no));
    r.mean_step_reward = parse_double(fields[1], line_no);
    r.collision = parse_double(fields[2], line_no) != 0.0;
    r.success_rate = parse_double(fields[3], line_no);
    r.mean_speed = parse_double(fields[4], line_no);
    r.epsilon = parse_double(fields[5], line_no);
    r.loss_critic = parse_double(fields[6], line_no);
    r.loss_actor = parse_double(fields[7], line_no);
    log.push_back(r);
  }
  return log;
}

}  // namespace coopdrive::harness
