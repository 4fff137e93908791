#pragma once

#include <filesystem>
#include <span>

#include "coopdrive/marl/train.hpp"
#include "json.hpp"

namespace coopdrive::harness {

using marl::EpisodeRecord;
using marl::TrainingLog;

struct MetricsRecord {
  double mean_episode_reward = 0.0;  // mean over episodes of the mean per-step team reward
  double collision_rate = 0.0;       // share of episodes with any collision
  double success_rate = 0.0;         // per-episode eligible success share, averaged
  double mean_speed = 0.0;           // per-episode mean robot speed, averaged
  std::size_t episodes = 0;
};

/// Throws std::invalid_argument on an empty record list.
MetricsRecord compute_metrics(std::span<const EpisodeRecord> records);

nlohmann::json metrics_to_json(const MetricsRecord& m);

inline constexpr const char* kCsvHeader =
    "episode,mean_step_reward,collision,success_rate,mean_speed,epsilon,loss_critic,loss_actor";

/// Writes the per-episode CSV (values as %.17g, so they round-trip exactly)
/// and returns the path of the summary JSON written next to it.
std::filesystem::path export_metrics(std::span<const EpisodeRecord> log, const std::filesystem::path& csv_path);

/// Inverse of the CSV half of export_metrics.
TrainingLog read_metrics_csv(const std::filesystem::path& csv_path);

std::filesystem::path summary_path_for(const std::filesystem::path& csv_path);

}  // namespace coopdrive::harness
