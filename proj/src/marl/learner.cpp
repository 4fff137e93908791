#include "coopdrive/marl/learner.hpp"

#include <algorithm>

#include "coopdrive/scenario.hpp"
#include "internal.hpp"

namespace coopdrive::marl {

namespace {

const std::vector<std::pair<Algo, std::string>>& registry() {
  static const std::vector<std::pair<Algo, std::string>> table{
      {Algo::kIdqn, "idqn"}, {Algo::kVdn, "vdn"},   {Algo::kQmix, "qmix"},
      {Algo::kMaddpg, "maddpg"}, {Algo::kComa, "coma"}, {Algo::kMaac, "maac"}};
  return table;
}

}  // namespace

Algo parse_algo(const std::string& name) {
  for (const auto& [algo, n] : registry()) {
    if (n == name) return algo;
  }
  throw ConfigError("unknown algorithm '" + name + "'");
}

std::string algo_name(Algo algo) {
  for (const auto& [a, n] : registry()) {
    if (a == algo) return n;
  }
  throw std::logic_error("unregistered algorithm");
}

const std::vector<std::string>& algo_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& entry : registry()) out.push_back(entry.second);
    return out;
  }();
  return names;
}

void Optimizer::step(const neural::TensorViews& params, const neural::TensorViews& grads) {
  if (clip > 0.0) neural::clip_global_norm(grads, clip);
  neural::ConstTensorViews g(grads.begin(), grads.end());
  neural::adam_update(params, g, state, lr);
}

Learner::Learner(std::size_t robots, std::size_t obs_dim, const Hyperparams& hp)
    : robots_(robots), obs_dim_(obs_dim), hp_(hp) {
  validate(hp_);
  if (robots_ == 0) throw std::invalid_argument("learner needs at least one robot");
}

Learner::Losses Learner::end_episode(Rng&) { return {}; }

double Learner::policy_update(Batch, Rng&) {
  throw std::logic_error(algo_name(algo()) + " has no actor to update");
}

void Learner::check_batch(Batch batch) const {
  if (batch.empty()) throw std::invalid_argument("update called with an empty batch");
  for (const auto* tr : batch) {
    if (tr->arity() != robots_ || tr->observations.size() != robots_ || tr->next_observations.size() != robots_ ||
        tr->rewards.size() != robots_) {
      throw std::invalid_argument("transition arity differs from the learner's robot count");
    }
  }
}

std::unique_ptr<Learner> make_learner(Algo algo, std::size_t robots, std::size_t obs_dim, const Hyperparams& hp,
                                      Rng& rng) {
  switch (algo) {
    case Algo::kIdqn:
    case Algo::kVdn:
    case Algo::kQmix:
      return std::make_unique<ValueLearner>(algo, robots, obs_dim, hp, rng);
    case Algo::kMaddpg:
    case Algo::kComa:
      return std::make_unique<CentralCriticLearner>(algo, robots, obs_dim, hp, rng);
    case Algo::kMaac:
      return std::make_unique<MaacLearner>(robots, obs_dim, hp, rng);
  }
  throw std::logic_error("unhandled algorithm");
}

namespace detail {

const NamedNetwork& find_network(const std::vector<NamedNetwork>& nets, const std::string& name) {
  auto it = std::find_if(nets.begin(), nets.end(), [&](const NamedNetwork& n) { return n.name == name; });
  if (it == nets.end()) throw ConfigError("checkpoint is missing network '" + name + "'");
  return *it;
}

void assign_checked(Mlp& dst, const Mlp& src, const std::string& name) {
  bool same = dst.depth() == src.depth() && dst.head() == src.head();
  for (std::size_t l = 0; same && l < dst.depth(); ++l) {
    same = dst.layers()[l].weight.rows() == src.layers()[l].weight.rows() &&
           dst.layers()[l].weight.cols() == src.layers()[l].weight.cols();
  }
  if (!same) throw ConfigError("network '" + name + "' has an incompatible shape");
  dst = src;
}

}  // namespace detail

}  // namespace coopdrive::marl
