#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "coopdrive/neural/mlp.hpp"
#include "json.hpp"

namespace coopdrive::neural {

/// One serialized network plus the run metadata needed to reload it.
struct Checkpoint {
  std::string algo;
  std::string scenario;
  std::string network;
  Mlp params;
  nlohmann::json hyperparameters = nlohmann::json::object();
  std::uint64_t seed = 0;
};

nlohmann::json mlp_to_json(const Mlp& net);
Mlp mlp_from_json(const nlohmann::json& doc);

nlohmann::json checkpoint_to_json(const Checkpoint& ck);
Checkpoint checkpoint_from_json(const nlohmann::json& doc);

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace coopdrive::neural
