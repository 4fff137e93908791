#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"

namespace coopdrive::marl {

struct Hyperparams {
  int episodes = 30000;
  int episode_length = 0;  // 0 keeps the scenario's horizon
  std::size_t batch = 1024;
  std::size_t buffer_capacity = 100000;
  double lr = 0.01;
  double gamma = 0.95;
  std::size_t hidden = 32;
  double tau = 0.01;
  double eps_start = 1.0;
  double eps_end = 0.05;
  double eps_decay_fraction = 0.6;  // share of episodes spent decaying
  double entropy = 0.01;            // MAAC entropy weight
  double grad_clip = 10.0;          // global-norm clip; 0 disables
  std::size_t mixer_embed = 32;

  /// Linear decay from eps_start to eps_end over the first
  /// eps_decay_fraction * episodes episodes, flat afterwards.
  double epsilon(int episode) const;

  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

void validate(const Hyperparams& hp);

nlohmann::json hyperparams_to_json(const Hyperparams& hp);
Hyperparams hyperparams_from_json(const nlohmann::json& doc);

/// Applies "key=value" assignments to named fields. Throws ConfigError on
/// unknown keys or values of the wrong type.
void apply_overrides(Hyperparams& hp, const std::vector<std::string>& assignments);

}  // namespace coopdrive::marl
