#include "coopdrive/marl/hyperparams.hpp"

#include <algorithm>

#include "coopdrive/scenario.hpp"

namespace coopdrive::marl {

using nlohmann::json;

double Hyperparams::epsilon(int episode) const {
  const double span = eps_decay_fraction * static_cast<double>(episodes);
  if (span <= 0.0 || episode >= span) return eps_end;
  const double frac = std::max(0.0, static_cast<double>(episode)) / span;
  return eps_start + (eps_end - eps_start) * frac;
}

void validate(const Hyperparams& hp) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("hyperparameter ") + what);
  };
  require(hp.episodes >= 1, "episodes must be >= 1");
  require(hp.episode_length >= 0, "episode_length must be >= 0");
  require(hp.batch >= 1, "batch must be >= 1");
  require(hp.buffer_capacity >= 1, "buffer_capacity must be >= 1");
  require(hp.lr > 0.0, "lr must be positive");
  require(hp.gamma >= 0.0 && hp.gamma < 1.0, "gamma must lie in [0,1)");
  require(hp.hidden >= 1, "hidden must be >= 1");
  require(hp.tau > 0.0 && hp.tau <= 1.0, "tau must lie in (0,1]");
  require(hp.eps_start >= 0.0 && hp.eps_start <= 1.0, "eps_start must lie in [0,1]");
  require(hp.eps_end >= 0.0 && hp.eps_end <= 1.0, "eps_end must lie in [0,1]");
  require(hp.eps_decay_fraction >= 0.0 && hp.eps_decay_fraction <= 1.0,
          "eps_decay_fraction must lie in [0,1]");
  require(hp.entropy >= 0.0, "entropy must be >= 0");
  require(hp.grad_clip >= 0.0, "grad_clip must be >= 0");
  require(hp.mixer_embed >= 1, "mixer_embed must be >= 1");
}

json hyperparams_to_json(const Hyperparams& hp) {
  return json{{"episodes", hp.episodes},
              {"episode_length", hp.episode_length},
              {"batch", hp.batch},
              {"buffer_capacity", hp.buffer_capacity},
              {"lr", hp.lr},
              {"gamma", hp.gamma},
              {"hidden", hp.hidden},
              {"tau", hp.tau},
              {"eps_start", hp.eps_start},
              {"eps_end", hp.eps_end},
              {"eps_decay_fraction", hp.eps_decay_fraction},
              {"entropy", hp.entropy},
              {"grad_clip", hp.grad_clip},
              {"mixer_embed", hp.mixer_embed}};
}

Hyperparams hyperparams_from_json(const json& doc) {
  Hyperparams hp;
  try {
    hp.episodes = doc.at("episodes").get<int>();
    hp.episode_length = doc.at("episode_length").get<int>();
    hp.batch = doc.at("batch").get<std::size_t>();
    hp.buffer_capacity = doc.at("buffer_capacity").get<std::size_t>();
    hp.lr = doc.at("lr").get<double>();
    hp.gamma = doc.at("gamma").get<double>();
    hp.hidden = doc.at("hidden").get<std::size_t>();
    hp.tau = doc.at("tau").get<double>();
    hp.eps_start = doc.at("eps_start").get<double>();
    hp.eps_end = doc.at("eps_end").get<double>();
    hp.eps_decay_fraction = doc.at("eps_decay_fraction").get<double>();
    hp.entropy = doc.at("entropy").get<double>();
    hp.grad_clip = doc.at("grad_clip").get<double>();
    hp.mixer_embed = doc.at("mixer_embed").get<std::size_t>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("hyperparameters: ") + e.what());
  }
  validate(hp);
  return hp;
}

void apply_overrides(Hyperparams& hp, const std::vector<std::string>& assignments) {
  json doc = hyperparams_to_json(hp);
  for (const auto& a : assignments) apply_override(doc, a);
  hp = hyperparams_from_json(doc);
}

}  // namespace coopdrive::marl
