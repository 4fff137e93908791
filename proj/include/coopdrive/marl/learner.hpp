#pragma once

#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "coopdrive/env.hpp"
#include "coopdrive/marl/attention.hpp"
#include "coopdrive/marl/hyperparams.hpp"
#include "coopdrive/marl/qmix.hpp"
#include "coopdrive/marl/replay.hpp"
#include "coopdrive/neural/adam.hpp"
#include "coopdrive/neural/mlp.hpp"

namespace coopdrive::marl {

enum class Algo { kIdqn, kVdn, kQmix, kMaddpg, kComa, kMaac };

/// Throws ConfigError for unknown names.
Algo parse_algo(const std::string& name);
std::string algo_name(Algo algo);
const std::vector<std::string>& algo_names();

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NamedNetwork {
  std::string name;
  Mlp net;
};

using Batch = std::span<const Transition* const>;

/// Adam plus optional global-norm clipping over one parameter group.
struct Optimizer {
  neural::AdamState state;
  double lr = 0.01;
  double clip = 0.0;

  void step(const neural::TensorViews& params, const neural::TensorViews& grads);
};

/// Common face of the six algorithms.
class Learner {
 public:
  virtual ~Learner() = default;

  virtual Algo algo() const = 0;
  std::size_t robots() const { return robots_; }
  std::size_t obs_dim() const { return obs_dim_; }
  /// Value-based learners explore epsilon-greedily; policy learners sample.
  virtual bool uses_epsilon() const = 0;

  virtual std::vector<int> explore(const std::vector<Observation>& obs, double epsilon, Rng& rng) = 0;
  /// Deployment actions: argmax Q or argmax pi.
  virtual std::vector<int> greedy(const std::vector<Observation>& obs) const = 0;

  struct Losses {
    std::optional<double> critic;
    std::optional<double> actor;
  };
  /// Per-step hook (storage and off-policy updates).
  virtual Losses observe(const Transition& tr, Rng& rng) = 0;
  /// Episode-end hook (on-policy updates).
  virtual Losses end_episode(Rng& rng);

  /// One squared-TD-error step plus a soft target sync; returns the loss.
  /// Throws std::invalid_argument on an empty batch.
  virtual double critic_update(Batch batch, Rng& rng) = 0;
  /// One score-function actor step; returns the surrogate loss. Value-based
  /// learners have no actor and throw std::logic_error.
  virtual double policy_update(Batch batch, Rng& rng);

  /// Every network, named for one-file-per-network checkpoints.
  virtual std::vector<NamedNetwork> networks() const = 0;
  /// Restores networks by name; throws ConfigError on missing names or
  /// shape mismatch.
  virtual void load_networks(const std::vector<NamedNetwork>& nets) = 0;

 protected:
  Learner(std::size_t robots, std::size_t obs_dim, const Hyperparams& hp);
  void check_batch(Batch batch) const;

  std::size_t robots_;
  std::size_t obs_dim_;
  Hyperparams hp_;
};

/// IDQN, VDN and QMIX: per-robot Q networks trained from replay with
/// epsilon-greedy exploration and the team reward.
class ValueLearner : public Learner {
 public:
  ValueLearner(Algo algo, std::size_t robots, std::size_t obs_dim, const Hyperparams& hp, Rng& rng);

  Algo algo() const override { return algo_; }
  bool uses_epsilon() const override { return true; }
  std::vector<int> explore(const std::vector<Observation>& obs, double epsilon, Rng& rng) override;
  std::vector<int> greedy(const std::vector<Observation>& obs) const override;
  Losses observe(const Transition& tr, Rng& rng) override;
  double critic_update(Batch batch, Rng& rng) override;
  std::vector<NamedNetwork> networks() const override;
  void load_networks(const std::vector<NamedNetwork>& nets) override;

  std::vector<Mlp>& q_nets() { return q_; }
  std::vector<Mlp>& target_q_nets() { return q_target_; }
  MixerParams& mixer() { return mixer_; }
  MixerParams& target_mixer() { return mixer_target_; }
  const ReplayBuffer& replay() const { return replay_; }

 private:
  Algo algo_;
  std::vector<Mlp> q_, q_target_;
  MixerParams mixer_, mixer_target_;
  std::vector<Optimizer> optimizers_;  // one per robot for IDQN, one joint otherwise
  ReplayBuffer replay_;
};

/// COMA and the MADDPG-style centralized actor-critic: per-robot softmax
/// actors, one centralized critic, on-policy updates from the latest episode.
///
/// COMA's critic sees [state, others' actions, robot id] and scores the
/// robot's own actions; the centralized-AC critic sees [state, joint action]
/// and returns one value.
class CentralCriticLearner : public Learner {
 public:
  CentralCriticLearner(Algo algo, std::size_t robots, std::size_t obs_dim, const Hyperparams& hp, Rng& rng);

  Algo algo() const override { return algo_; }
  bool uses_epsilon() const override { return false; }
  std::vector<int> explore(const std::vector<Observation>& obs, double epsilon, Rng& rng) override;
  std::vector<int> greedy(const std::vector<Observation>& obs) const override;
  Losses observe(const Transition& tr, Rng& rng) override;
  Losses end_episode(Rng& rng) override;
  double critic_update(Batch batch, Rng& rng) override;
  double policy_update(Batch batch, Rng& rng) override;
  std::vector<NamedNetwork> networks() const override;
  void load_networks(const std::vector<NamedNetwork>& nets) override;

  std::vector<Mlp>& actors() { return actors_; }
  Mlp& critic() { return critic_; }
  Mlp& target_critic() { return critic_target_; }
  std::vector<double> policy(std::size_t robot, const Observation& obs) const;
  /// Critic input row for robot i (COMA) or the joint row (centralized AC).
  std::vector<double> critic_input(std::span<const Observation> obs, std::span<const int> actions,
                                   std::size_t robot) const;

 private:
  Algo algo_;
  std::vector<Mlp> actors_;
  Mlp critic_, critic_target_;
  std::vector<Optimizer> actor_opt_;
  Optimizer critic_opt_;
  std::vector<Transition> episode_;
};

/// Attention actor-critic: per-robot softmax actors, attention critic,
/// soft (entropy-regularized) targets, per-robot rewards, replay training.
class MaacLearner : public Learner {
 public:
  MaacLearner(std::size_t robots, std::size_t obs_dim, const Hyperparams& hp, Rng& rng);

  Algo algo() const override { return Algo::kMaac; }
  bool uses_epsilon() const override { return false; }
  std::vector<int> explore(const std::vector<Observation>& obs, double epsilon, Rng& rng) override;
  std::vector<int> greedy(const std::vector<Observation>& obs) const override;
  Losses observe(const Transition& tr, Rng& rng) override;
  double critic_update(Batch batch, Rng& rng) override;
  double policy_update(Batch batch, Rng& rng) override;
  std::vector<NamedNetwork> networks() const override;
  void load_networks(const std::vector<NamedNetwork>& nets) override;

  std::vector<Mlp>& actors() { return actors_; }
  AttentionParams& critic() { return critic_; }
  AttentionParams& target_critic() { return critic_target_; }
  std::vector<double> policy(std::size_t robot, const Observation& obs) const;

 private:
  std::vector<Mlp> actors_, actors_target_;
  AttentionParams critic_, critic_target_;
  std::vector<Optimizer> actor_opt_;
  Optimizer critic_opt_;
  ReplayBuffer replay_;
};

std::unique_ptr<Learner> make_learner(Algo algo, std::size_t robots, std::size_t obs_dim, const Hyperparams& hp,
                                      Rng& rng);

}  // namespace coopdrive::marl
