#include "coopdrive/harness/run.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <stdexcept>

#include "coopdrive/neural/checkpoint.hpp"

namespace coopdrive::harness {

using nlohmann::json;

namespace {

std::vector<std::string> paths_to_strings(const std::vector<fs::path>& paths) {
  std::vector<std::string> out;
  for (const auto& p : paths) out.push_back(p.string());
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create directory " + dir.string());
}

fs::path checkpoint_dir(const fs::path& dir) {
  if (fs::is_directory(dir / "checkpoints")) return dir / "checkpoints";
  return dir;
}

}  // namespace

json manifest_to_json(const RunManifest& m) {
  return {{"command", m.command},
          {"algo", m.algo},
          {"scenario", m.scenario},
          {"seed", m.seed},
          {"scenario_overrides", m.scenario_overrides},
          {"hyperparameter_overrides", m.hyperparameter_overrides},
          {"hyperparameters", m.hyperparameters},
          {"log", m.log.string()},
          {"summary", m.summary.string()},
          {"checkpoints", paths_to_strings(m.checkpoints)},
          {"extra", m.extra},
          {"started_at", m.started_at},
          {"finished_at", m.finished_at}};
}

RunManifest manifest_from_json(const json& doc) {
  RunManifest m;
  m.command = doc.at("command").get<std::string>();
  m.algo = doc.at("algo").get<std::string>();
  m.scenario = doc.at("scenario").get<std::string>();
  m.seed = doc.at("seed").get<std::uint64_t>();
  m.scenario_overrides = doc.at("scenario_overrides").get<std::vector<std::string>>();
  m.hyperparameter_overrides = doc.at("hyperparameter_overrides").get<std::vector<std::string>>();
  m.hyperparameters = doc.at("hyperparameters");
  m.log = doc.at("log").get<std::string>();
  m.summary = doc.at("summary").get<std::string>();
  for (const auto& p : doc.at("checkpoints")) m.checkpoints.emplace_back(p.get<std::string>());
  m.extra = doc.value("extra", json::object());
  m.started_at = doc.at("started_at").get<std::string>();
  m.finished_at = doc.at("finished_at").get<std::string>();
  return m;
}

void write_manifest(const RunManifest& m, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << manifest_to_json(m).dump(2) << '\n';
}

RunManifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return manifest_from_json(json::parse(in));
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<fs::path> save_learner(const marl::Learner& learner, const fs::path& dir, const std::string& scenario,
                                   const marl::Hyperparams& hp, std::uint64_t seed) {
  ensure_dir(dir);
  std::vector<fs::path> paths;
  for (const auto& net : learner.networks()) {
    neural::Checkpoint ck{marl::algo_name(learner.algo()), scenario, net.name, net.net, marl::hyperparams_to_json(hp),
                          seed};
    const auto path = dir / (net.name + ".json");
    neural::save_checkpoint(ck, path);
    paths.push_back(path);
  }
  return paths;
}

LoadedLearner load_learner(const fs::path& dir, std::optional<std::size_t> robots, std::optional<std::size_t> obs_dim) {
  const auto ck_dir = checkpoint_dir(dir);
  if (!fs::is_directory(ck_dir)) throw std::runtime_error("no checkpoint directory at " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(ck_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<neural::Checkpoint> cks;
  for (const auto& f : files) {
    try {
      cks.push_back(neural::load_checkpoint(f));
    } catch (const json::exception&) {
      // Not a checkpoint file.
    }
  }
  if (cks.empty()) throw std::runtime_error("no checkpoints found in " + ck_dir.string());

  const auto& head = cks.front();
  for (const auto& ck : cks) {
    if (ck.algo != head.algo || ck.scenario != head.scenario) {
      throw ConfigError("checkpoints in " + ck_dir.string() + " come from different runs");
    }
  }
  LoadedLearner out;
  out.scenario = head.scenario;
  out.hp = marl::hyperparams_from_json(head.hyperparameters);
  out.seed = head.seed;
  const marl::Algo algo = marl::parse_algo(head.algo);

  // Arity defaults to what the checkpoints were trained with.
  std::size_t trained_robots = 0;
  std::size_t trained_obs = 0;
  for (const auto& ck : cks) {
    const auto& name = ck.network;
    if (name.rfind("q_", 0) == 0 || name.rfind("actor_", 0) == 0) {
      ++trained_robots;
      trained_obs = ck.params.input_dim();
    }
  }
  const std::size_t n = robots.value_or(trained_robots);
  const std::size_t d = obs_dim.value_or(trained_obs);
  if (n != trained_robots || d != trained_obs) {
    throw ConfigError("checkpoint arity mismatch: trained for " + std::to_string(trained_robots) + " robots x " +
                      std::to_string(trained_obs) + " inputs, scenario has " + std::to_string(n) + " x " +
                      std::to_string(d));
  }
  Rng rng = make_rng(out.seed, 11);
  out.learner = marl::make_learner(algo, n, d, out.hp, rng);
  std::vector<marl::NamedNetwork> nets;
  for (auto& ck : cks) nets.push_back({ck.network, std::move(ck.params)});
  out.learner->load_networks(nets);
  return out;
}

EvalResult evaluate(Env& env, const PolicyFactory& policy, int episodes, std::uint64_t base_seed) {
  if (episodes < 1) throw ConfigError("evaluation needs at least one episode");
  EvalResult out;
  for (int i = 0; i < episodes; ++i) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(i);
    auto outcome = marl::play_episode(env, seed, policy(i));
    outcome.record.episode = i;
    outcome.record.epsilon = 0.0;
    out.log.push_back(outcome.record);
    out.socially_driven.push_back(outcome.socially_driven);
    out.seeds.push_back(seed);
  }
  out.metrics = compute_metrics(out.log);
  return out;
}

EvalResult evaluate(Env& env, const marl::Learner& learner, int episodes, std::uint64_t base_seed) {
  return evaluate(
      env, [&](int) -> marl::ActFn { return [&](const std::vector<Observation>& obs) { return learner.greedy(obs); }; },
      episodes, base_seed);
}

TrainRun run_train(const TrainOptions& options) {
  const marl::Algo algo = marl::parse_algo(options.algo);
  marl::Hyperparams hp;
  if (options.episodes) hp.episodes = *options.episodes;
  marl::apply_overrides(hp, options.hyperparameter_overrides);
  marl::validate(hp);
  Env env = Env::make(options.scenario, options.scenario_overrides);
  ensure_dir(options.out);

  RunManifest m;
  m.command = "train";
  m.algo = marl::algo_name(algo);
  m.scenario = options.scenario;
  m.seed = options.seed;
  m.scenario_overrides = options.scenario_overrides;
  m.hyperparameter_overrides = options.hyperparameter_overrides;
  m.hyperparameters = marl::hyperparams_to_json(hp);
  m.started_at = utc_timestamp();

  auto result = marl::train(algo, env, hp, options.seed, options.progress);

  m.log = options.out / "metrics.csv";
  m.summary = export_metrics(result.log, m.log);
  m.checkpoints = save_learner(*result.learner, options.out / "checkpoints", options.scenario, hp, options.seed);
  m.finished_at = utc_timestamp();
  write_manifest(m, options.out / "manifest.json");

  TrainRun run;
  run.metrics = compute_metrics(result.log);
  run.log = std::move(result.log);
  run.manifest = std::move(m);
  return run;
}

EvalRun run_eval(const EvalOptions& options) {
  // Read metadata first so arity can be checked against the target scenario.
  auto probe = load_learner(options.checkpoint);
  const std::string scenario = options.scenario.value_or(probe.scenario);
  std::vector<std::string> overrides;
  if (probe.hp.episode_length > 0) overrides.push_back("episode_length=" + std::to_string(probe.hp.episode_length));
  overrides.insert(overrides.end(), options.scenario_overrides.begin(), options.scenario_overrides.end());
  Env env = Env::make(scenario, overrides);
  auto loaded = load_learner(options.checkpoint, env.learner_count(), env.observation_size());
  if (options.replace_with_social) env.set_social_replacement(1.0);

  RunManifest m;
  m.command = "eval";
  m.algo = marl::algo_name(loaded.learner->algo());
  m.scenario = scenario;
  m.seed = options.seed;
  m.scenario_overrides = overrides;
  m.hyperparameters = marl::hyperparams_to_json(loaded.hp);
  m.started_at = utc_timestamp();

  EvalRun run;
  run.result = evaluate(env, *loaded.learner, options.episodes, options.seed);

  json driven = json::array();
  for (const auto& s : run.result.socially_driven) driven.push_back(s ? json(*s) : json(nullptr));
  m.extra = {{"checkpoint", options.checkpoint.string()},
             {"episodes", options.episodes},
             {"replace_with_social", options.replace_with_social},
             {"episode_seeds", run.result.seeds},
             {"socially_driven", driven},
             {"metrics", metrics_to_json(run.result.metrics)}};
  if (options.out) {
    ensure_dir(*options.out);
    m.log = *options.out / "eval_metrics.csv";
    m.summary = export_metrics(run.result.log, m.log);
  }
  m.finished_at = utc_timestamp();
  if (options.out) write_manifest(m, *options.out / "eval_manifest.json");
  run.manifest = std::move(m);
  return run;
}

}  // namespace coopdrive::harness
