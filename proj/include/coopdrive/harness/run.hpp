#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "coopdrive/harness/metrics.hpp"
#include "coopdrive/marl/learner.hpp"
#include "coopdrive/marl/train.hpp"

namespace coopdrive::harness {

namespace fs = std::filesystem;

struct RunManifest {
  std::string command;  // "train" or "eval"
  std::string algo;
  std::string scenario;
  std::uint64_t seed = 0;
  std::vector<std::string> scenario_overrides;
  std::vector<std::string> hyperparameter_overrides;
  nlohmann::json hyperparameters = nlohmann::json::object();
  fs::path log;
  fs::path summary;
  std::vector<fs::path> checkpoints;
  nlohmann::json extra = nlohmann::json::object();  // command-specific fields
  std::string started_at;
  std::string finished_at;
};

nlohmann::json manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& doc);
void write_manifest(const RunManifest& m, const fs::path& path);
RunManifest read_manifest(const fs::path& path);

/// UTC, ISO 8601, second resolution.
std::string utc_timestamp();

// Checkpoints: one JSON file per named network under `dir`.
std::vector<fs::path> save_learner(const marl::Learner& learner, const fs::path& dir, const std::string& scenario,
                                   const marl::Hyperparams& hp, std::uint64_t seed);

struct LoadedLearner {
  std::unique_ptr<marl::Learner> learner;
  std::string scenario;  // scenario it was trained on
  marl::Hyperparams hp;
  std::uint64_t seed = 0;
};

/// Accepts a run directory or its checkpoints/ subdirectory. Throws
/// ConfigError when the networks do not fit `robots` x `obs_dim`, and
/// std::runtime_error when no checkpoint is found.
LoadedLearner load_learner(const fs::path& dir, std::optional<std::size_t> robots = std::nullopt,
                           std::optional<std::size_t> obs_dim = std::nullopt);

struct EvalResult {
  TrainingLog log;
  std::vector<std::optional<int>> socially_driven;  // per episode
  std::vector<std::uint64_t> seeds;
  MetricsRecord metrics;
};

/// Builds a fresh policy for each episode index (scripted policies may keep state).
using PolicyFactory = std::function<marl::ActFn(int episode)>;

/// Plays `episodes` episodes with seeds base_seed + i. Epsilon and loss
/// columns are 0 and NaN.
EvalResult evaluate(Env& env, const PolicyFactory& policy, int episodes, std::uint64_t base_seed);
/// Greedy deployment of a trained learner.
EvalResult evaluate(Env& env, const marl::Learner& learner, int episodes, std::uint64_t base_seed);

struct TrainOptions {
  std::string algo;
  std::string scenario;
  std::optional<int> episodes;
  std::uint64_t seed = 0;
  fs::path out;
  std::vector<std::string> scenario_overrides;
  std::vector<std::string> hyperparameter_overrides;  // e.g. "batch=256"
  marl::ProgressFn progress;
};

struct TrainRun {
  RunManifest manifest;
  MetricsRecord metrics;
  TrainingLog log;
};

/// Trains, then writes metrics.csv, metrics.summary.json, checkpoints/ and
/// manifest.json under options.out. Throws ConfigError on bad names or
/// overrides and std::runtime_error on I/O failure.
TrainRun run_train(const TrainOptions& options);

struct EvalOptions {
  fs::path checkpoint;
  std::optional<std::string> scenario;  // defaults to the training scenario
  std::vector<std::string> scenario_overrides;
  int episodes = 24;
  std::uint64_t seed = 0;
  bool replace_with_social = false;
  std::optional<fs::path> out;
};

struct EvalRun {
  RunManifest manifest;
  EvalResult result;
};

EvalRun run_eval(const EvalOptions& options);

}  // namespace coopdrive::harness
