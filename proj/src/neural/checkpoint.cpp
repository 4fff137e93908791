#include "coopdrive/neural/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

namespace coopdrive::neural {

nlohmann::json mlp_to_json(const Mlp& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : net.layers()) {
    const auto w = layer.weight.values();
    layers.push_back({{"shape", {layer.weight.rows(), layer.weight.cols()}},
                      {"weight", std::vector<double>(w.begin(), w.end())},
                      {"bias", layer.bias}});
  }
  return {{"output", net.head() == OutputActivation::kSoftmax ? "softmax" : "linear"},
          {"layers", std::move(layers)}};
}

Mlp mlp_from_json(const nlohmann::json& doc) {
  const std::string head = doc.at("output").get<std::string>();
  if (head != "softmax" && head != "linear") {
    throw std::invalid_argument("checkpoint: unknown output activation '" + head + "'");
  }
  std::vector<Dense> layers;
  for (const auto& entry : doc.at("layers")) {
    const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
    if (shape.size() != 2) throw std::invalid_argument("checkpoint: layer shape must be [rows, cols]");
    layers.push_back(Dense{Matrix(shape[0], shape[1], entry.at("weight").get<std::vector<double>>()),
                           entry.at("bias").get<std::vector<double>>()});
  }
  return Mlp(std::move(layers),
             head == "softmax" ? OutputActivation::kSoftmax : OutputActivation::kLinear);
}

nlohmann::json checkpoint_to_json(const Checkpoint& ck) {
  return {{"algo", ck.algo},
          {"scenario", ck.scenario},
          {"network", ck.network},
          {"params", mlp_to_json(ck.params)},
          {"hyperparameters", ck.hyperparameters},
          {"seed", ck.seed}};
}

Checkpoint checkpoint_from_json(const nlohmann::json& doc) {
  Checkpoint ck;
  ck.algo = doc.at("algo").get<std::string>();
  ck.scenario = doc.at("scenario").get<std::string>();
  ck.network = doc.at("network").get<std::string>();
  ck.params = mlp_from_json(doc.at("params"));
  ck.hyperparameters = doc.value("hyperparameters", nlohmann::json::object());
  ck.seed = doc.value("seed", std::uint64_t{0});
  return ck;
}

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << checkpoint_to_json(ck).dump(1) << '\n';
  if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
  return checkpoint_from_json(nlohmann::json::parse(in));
}

}  // namespace coopdrive::neural
