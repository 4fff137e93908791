#include <cmath>
#include <limits>

#include "coopdrive/marl/learner.hpp"
#include "coopdrive/marl/policy.hpp"
#include "coopdrive/marl/value.hpp"
#include "internal.hpp"

namespace coopdrive::marl {

using detail::kActions;
using detail::kMinProb;
using neural::OutputActivation;

namespace {

// Gumbel-max: argmax(log p + g) with g ~ Gumbel(0, 1), one draw per action.
int gumbel_max(std::span<const double> pi, Rng& rng) {
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < pi.size(); ++k) {
    const double g = -std::log(-std::log(uniform01(rng)));
    const double score = std::log(pi[k]) + g;
    if (score > best_score) {
      best_score = score;
      best = static_cast<int>(k);
    }
  }
  return best;
}

}  // namespace

CentralCriticLearner::CentralCriticLearner(Algo algo, std::size_t robots, std::size_t obs_dim, const Hyperparams& hp,
                                           Rng& rng)
    : Learner(robots, obs_dim, hp), algo_(algo) {
  if (algo != Algo::kComa && algo != Algo::kMaddpg) {
    throw std::invalid_argument("CentralCriticLearner handles coma and maddpg only");
  }
  for (std::size_t i = 0; i < robots; ++i) {
    actors_.emplace_back(std::initializer_list<std::size_t>{obs_dim, hp.hidden, hp.hidden, kActions},
                         OutputActivation::kSoftmax, rng);
  }
  const std::size_t in = algo == Algo::kComa ? robots * obs_dim + (robots - 1) * kActions + robots
                                             : robots * obs_dim + robots * kActions;
  const std::size_t out = algo == Algo::kComa ? kActions : 1;
  critic_ = Mlp({in, hp.hidden, hp.hidden, out}, OutputActivation::kLinear, rng);
  critic_target_ = critic_;
  actor_opt_.assign(robots, Optimizer{{}, hp.lr, hp.grad_clip});
  critic_opt_ = Optimizer{{}, hp.lr, hp.grad_clip};
}

std::vector<double> CentralCriticLearner::policy(std::size_t robot, const Observation& obs) const {
  return neural::mlp_forward(actors_.at(robot), obs);
}

std::vector<double> CentralCriticLearner::critic_input(std::span<const Observation> obs, std::span<const int> actions,
                                                       std::size_t robot) const {
  std::vector<double> x;
  x.reserve(critic_.input_dim());
  for (const auto& o : obs) x.insert(x.end(), o.begin(), o.end());
  for (std::size_t k = 0; k < robots_; ++k) {
    if (algo_ == Algo::kComa && k == robot) continue;
    const auto hot = one_hot(actions[k]);
    x.insert(x.end(), hot.begin(), hot.end());
  }
  if (algo_ == Algo::kComa) {
    for (std::size_t k = 0; k < robots_; ++k) x.push_back(k == robot ? 1.0 : 0.0);
  }
  return x;
}

std::vector<int> CentralCriticLearner::explore(const std::vector<Observation>& obs, double, Rng& rng) {
  std::vector<int> actions;
  for (std::size_t i = 0; i < robots_; ++i) {
    const auto pi = policy(i, obs[i]);
    actions.push_back(algo_ == Algo::kMaddpg ? gumbel_max(pi, rng) : sample_categorical(pi, rng));
  }
  return actions;
}

std::vector<int> CentralCriticLearner::greedy(const std::vector<Observation>& obs) const {
  std::vector<int> actions;
  for (std::size_t i = 0; i < robots_; ++i) actions.push_back(argmax(policy(i, obs[i])));
  return actions;
}

Learner::Losses CentralCriticLearner::observe(const Transition& tr, Rng&) {
  episode_.push_back(tr);
  return {};
}

Learner::Losses CentralCriticLearner::end_episode(Rng& rng) {
  if (episode_.empty()) return {};
  std::vector<const Transition*> batch;
  for (const auto& tr : episode_) batch.push_back(&tr);
  Losses out;
  out.critic = critic_update(batch, rng);
  out.actor = policy_update(batch, rng);
  episode_.clear();
  return out;
}

double CentralCriticLearner::critic_update(Batch batch, Rng& rng) {
  check_batch(batch);
  const std::size_t n = robots_;
  const std::size_t size = batch.size();
  const std::size_t per = algo_ == Algo::kComa ? n : 1;  // critic rows per transition
  const std::size_t rows = size * per;

  Matrix x(rows, critic_.input_dim()), next_x(rows, critic_.input_dim());
  std::vector<int> own(rows, 0), next_own(rows, 0);
  std::vector<bool> bootstrap(size);
  for (std::size_t b = 0; b < size; ++b) {
    const auto* tr = batch[b];
    bootstrap[b] = !tr->done;
    // On-policy successor actions: the next transition of the trajectory when
    // it continues this one, otherwise a fresh draw from the current actors.
    std::vector<int> next_actions(n, 0);
    if (!tr->done) {
      if (b + 1 < size && batch[b + 1]->observations == tr->next_observations) {
        next_actions = batch[b + 1]->actions;
      } else {
        for (std::size_t i = 0; i < n; ++i) next_actions[i] = sample_categorical(policy(i, tr->next_observations[i]), rng);
      }
    }
    for (std::size_t r = 0; r < per; ++r) {
      const std::size_t row = b * per + r;
      const auto in = critic_input(tr->observations, tr->actions, r);
      std::copy(in.begin(), in.end(), x.row_span(row).begin());
      const auto next_in = critic_input(tr->next_observations, next_actions, r);
      std::copy(next_in.begin(), next_in.end(), next_x.row_span(row).begin());
      own[row] = algo_ == Algo::kComa ? tr->actions[r] : 0;
      next_own[row] = algo_ == Algo::kComa ? next_actions[r] : 0;
    }
  }

  neural::MlpCache cache;
  neural::forward_batch(critic_, x, cache);
  const Matrix next_q = neural::forward_batch(critic_target_, next_x);
  Matrix upstream(rows, critic_.output_dim());
  const double scale = 2.0 / static_cast<double>(rows);
  double loss = 0.0;
  for (std::size_t row = 0; row < rows; ++row) {
    const std::size_t b = row / per;
    const auto a = static_cast<std::size_t>(own[row]);
    const double y = td_target(batch[b]->team_reward, hp_.gamma, next_q(row, static_cast<std::size_t>(next_own[row])),
                               !bootstrap[b]);
    const double d = cache.output(row, a) - y;
    loss += d * d;
    upstream(row, a) = scale * d;
  }
  loss /= static_cast<double>(rows);
  detail::require_finite(loss, algo_name(algo_) + " critic");

  Mlp grads = critic_.zeros_like();
  neural::backward_batch(critic_, cache, upstream, grads);
  critic_opt_.step(critic_.views(), grads.views());
  neural::soft_update(critic_, critic_target_, hp_.tau);
  return loss;
}

double CentralCriticLearner::policy_update(Batch batch, Rng&) {
  check_batch(batch);
  const std::size_t n = robots_;
  const std::size_t size = batch.size();
  const double inv = 1.0 / static_cast<double>(size);

  // Critic scores are fixed weights for the score-function gradient.
  std::vector<double> joint_q(size, 0.0);
  if (algo_ == Algo::kMaddpg) {
    Matrix x(size, critic_.input_dim());
    for (std::size_t b = 0; b < size; ++b) {
      const auto in = critic_input(batch[b]->observations, batch[b]->actions, 0);
      std::copy(in.begin(), in.end(), x.row_span(b).begin());
    }
    const Matrix q = neural::forward_batch(critic_, x);
    for (std::size_t b = 0; b < size; ++b) joint_q[b] = q(b, 0);
  }

  double total_loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    neural::MlpCache cache;
    neural::forward_batch(actors_[i], detail::gather_obs(batch, i, false), cache);
    const Matrix& pi = cache.output;

    std::vector<double> weight(size);
    if (algo_ == Algo::kComa) {
      Matrix x(size, critic_.input_dim());
      for (std::size_t b = 0; b < size; ++b) {
        const auto in = critic_input(batch[b]->observations, batch[b]->actions, i);
        std::copy(in.begin(), in.end(), x.row_span(b).begin());
      }
      const Matrix q = neural::forward_batch(critic_, x);
      for (std::size_t b = 0; b < size; ++b) weight[b] = coma_advantage(q.row_span(b), pi.row_span(b), batch[b]->actions[i]);
    } else {
      weight = joint_q;
    }

    Matrix upstream(size, kActions);
    double loss = 0.0;
    for (std::size_t b = 0; b < size; ++b) {
      const auto a = static_cast<std::size_t>(batch[b]->actions[i]);
      const double p = std::max(pi(b, a), kMinProb);
      loss -= weight[b] * std::log(p) * inv;
      upstream(b, a) = -weight[b] / p * inv;
    }
    detail::require_finite(loss, algo_name(algo_) + " actor");
    Mlp grads = actors_[i].zeros_like();
    neural::backward_batch(actors_[i], cache, upstream, grads);
    actor_opt_[i].step(actors_[i].views(), grads.views());
    total_loss += loss;
  }
  return total_loss / static_cast<double>(n);
}

std::vector<NamedNetwork> CentralCriticLearner::networks() const {
  std::vector<NamedNetwork> out;
  for (std::size_t i = 0; i < robots_; ++i) out.push_back({"actor_" + std::to_string(i), actors_[i]});
  out.push_back({"critic", critic_});
  return out;
}

void CentralCriticLearner::load_networks(const std::vector<NamedNetwork>& nets) {
  for (std::size_t i = 0; i < robots_; ++i) {
    const std::string name = "actor_" + std::to_string(i);
    detail::assign_checked(actors_[i], detail::find_network(nets, name).net, name);
  }
  detail::assign_checked(critic_, detail::find_network(nets, "critic").net, "critic");
  critic_target_ = critic_;
}

}  // namespace coopdrive::marl
