// coopdrive: train, evaluate and inspect cooperative-driving MARL runs.
//
// Exit codes: 0 success, 2 argument error, 3 runtime failure.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "coopdrive/harness/run.hpp"
#include "coopdrive/scenario.hpp"

namespace {

using namespace coopdrive;

constexpr int kOk = 0;
constexpr int kArgError = 2;
constexpr int kRuntimeError = 3;

constexpr std::string_view kHpPrefix = "hp.";

struct SplitOverrides {
  std::vector<std::string> scenario;
  std::vector<std::string> hyperparameters;
};

// `--set hp.batch=256` goes to the trainer, everything else to the scenario.
SplitOverrides split_overrides(const std::vector<std::string>& sets) {
  SplitOverrides out;
  for (const auto& s : sets) {
    if (s.rfind(kHpPrefix, 0) == 0) {
      out.hyperparameters.push_back(s.substr(kHpPrefix.size()));
    } else {
      out.scenario.push_back(s);
    }
  }
  return out;
}

void print_metrics(const harness::MetricsRecord& m) { std::cout << harness::metrics_to_json(m).dump(2) << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative multi-robot driving: training and evaluation"};
  app.require_subcommand(1);

  std::vector<std::string> sets;

  harness::TrainOptions train;
  int log_every = 0;
  int train_episodes = 0;
  std::string train_out;
  auto* train_cmd = app.add_subcommand("train", "Train one algorithm on one scenario");
  train_cmd->add_option("--algo", train.algo, "Algorithm")
      ->required()
      ->check(CLI::IsMember(marl::algo_names()));
  train_cmd->add_option("--scenario", train.scenario, "Scenario name")->required();
  train_cmd->add_option("--episodes", train_episodes, "Training episodes (default 30000)")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--seed", train.seed, "Run seed");
  train_cmd->add_option("--out", train_out, "Output directory")->required();
  train_cmd->add_option("--set", sets, "Override key=value (hp.<name> for hyperparameters)");
  train_cmd->add_option("--log-every", log_every, "Print a progress line every N episodes")
      ->check(CLI::NonNegativeNumber);

  harness::EvalOptions eval;
  std::string eval_scenario, eval_out, eval_checkpoint;
  auto* eval_cmd = app.add_subcommand("eval", "Greedy evaluation of a trained run");
  eval_cmd->add_option("--checkpoint", eval_checkpoint, "Run or checkpoint directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--scenario", eval_scenario, "Scenario (default: the training scenario)");
  eval_cmd->add_option("--episodes", eval.episodes, "Episodes")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--seed", eval.seed, "Base seed; episode i uses seed + i");
  eval_cmd->add_flag("--replace-with-social", eval.replace_with_social,
                     "Hand one random learner per episode to the social agent");
  eval_cmd->add_option("--out", eval_out, "Directory for eval_metrics.csv and eval_manifest.json");
  eval_cmd->add_option("--set", sets, "Scenario override key=value");

  std::string csv_path;
  auto* metrics_cmd = app.add_subcommand("metrics", "Summarize a metrics CSV");
  metrics_cmd->add_option("csv", csv_path, "metrics.csv path")->required()->check(CLI::ExistingFile);

  auto* scenarios_cmd = app.add_subcommand("scenarios", "Scenario catalog");
  scenarios_cmd->require_subcommand(1);
  auto* list_cmd = scenarios_cmd->add_subcommand("list", "List scenario names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kArgError;
  }

  try {
    const auto split = split_overrides(sets);
    if (*train_cmd) {
      if (train_episodes > 0) train.episodes = train_episodes;
      train.out = train_out;
      train.scenario_overrides = split.scenario;
      train.hyperparameter_overrides = split.hyperparameters;
      if (log_every > 0) {
        train.progress = [log_every](const marl::EpisodeRecord& r) {
          if ((r.episode + 1) % log_every != 0) return;
          std::fprintf(stderr, "episode %d reward %.4f collision %d success %.3f eps %.3f loss %.4g\n", r.episode + 1,
                       r.mean_step_reward, r.collision ? 1 : 0, r.success_rate, r.epsilon, r.loss_critic);
        };
      }
      print_metrics(harness::run_train(train).metrics);
    } else if (*eval_cmd) {
      if (!split.hyperparameters.empty()) throw ConfigError("eval does not take hyperparameter overrides");
      eval.checkpoint = eval_checkpoint;
      if (!eval_scenario.empty()) eval.scenario = eval_scenario;
      if (!eval_out.empty()) eval.out = eval_out;
      eval.scenario_overrides = split.scenario;
      print_metrics(harness::run_eval(eval).result.metrics);
    } else if (*metrics_cmd) {
      print_metrics(harness::compute_metrics(harness::read_metrics_csv(csv_path)));
    } else if (*list_cmd) {
      for (const auto& name : ScenarioCatalog::standard().names()) std::cout << name << '\n';
    }
  } catch (const std::invalid_argument& e) {  // ConfigError and friends
    std::cerr << "error: " << e.what() << '\n';
    return kArgError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}
