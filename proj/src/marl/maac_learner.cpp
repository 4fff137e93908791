#include <cmath>

#include "coopdrive/marl/learner.hpp"
#include "coopdrive/marl/policy.hpp"
#include "coopdrive/marl/value.hpp"
#include "internal.hpp"

namespace coopdrive::marl {

using detail::kActions;
using detail::kMinProb;
using neural::OutputActivation;

namespace {

struct Sampled {
  std::vector<std::vector<int>> actions;  // per robot, per row
  std::vector<Matrix> one_hot;
};

Sampled sample_rows(const std::vector<Matrix>& probs, Rng& rng) {
  Sampled s;
  for (const auto& p : probs) {
    std::vector<int> acts;
    for (std::size_t b = 0; b < p.rows(); ++b) acts.push_back(sample_categorical(p.row_span(b), rng));
    s.one_hot.push_back(detail::one_hot_rows(acts));
    s.actions.push_back(std::move(acts));
  }
  return s;
}

}  // namespace

MaacLearner::MaacLearner(std::size_t robots, std::size_t obs_dim, const Hyperparams& hp, Rng& rng)
    : Learner(robots, obs_dim, hp), replay_(hp.buffer_capacity) {
  if (robots < 2) throw std::invalid_argument("maac needs at least two robots");
  for (std::size_t i = 0; i < robots; ++i) {
    actors_.emplace_back(std::initializer_list<std::size_t>{obs_dim, hp.hidden, hp.hidden, kActions},
                         OutputActivation::kSoftmax, rng);
  }
  actors_target_ = actors_;
  critic_ = AttentionParams(robots, obs_dim, kActions, hp.hidden, hp.hidden, rng);
  critic_target_ = critic_;
  actor_opt_.assign(robots, Optimizer{{}, hp.lr, hp.grad_clip});
  critic_opt_ = Optimizer{{}, hp.lr, hp.grad_clip};
}

std::vector<double> MaacLearner::policy(std::size_t robot, const Observation& obs) const {
  return neural::mlp_forward(actors_.at(robot), obs);
}

std::vector<int> MaacLearner::explore(const std::vector<Observation>& obs, double, Rng& rng) {
  std::vector<int> actions;
  for (std::size_t i = 0; i < robots_; ++i) actions.push_back(sample_categorical(policy(i, obs[i]), rng));
  return actions;
}

std::vector<int> MaacLearner::greedy(const std::vector<Observation>& obs) const {
  std::vector<int> actions;
  for (std::size_t i = 0; i < robots_; ++i) actions.push_back(argmax(policy(i, obs[i])));
  return actions;
}

Learner::Losses MaacLearner::observe(const Transition& tr, Rng& rng) {
  replay_.push(tr);
  if (replay_.size() < hp_.batch) return {};
  const auto batch = replay_.sample(hp_.batch, rng);
  Losses out;
  out.critic = critic_update(batch, rng);
  out.actor = policy_update(batch, rng);
  return out;
}

double MaacLearner::critic_update(Batch batch, Rng& rng) {
  check_batch(batch);
  const std::size_t n = robots_;
  const std::size_t size = batch.size();

  std::vector<Matrix> obs, next_obs, acts, next_probs;
  for (std::size_t k = 0; k < n; ++k) {
    obs.push_back(detail::gather_obs(batch, k, false));
    next_obs.push_back(detail::gather_obs(batch, k, true));
    acts.push_back(detail::one_hot_rows(detail::column(batch, k)));
    next_probs.push_back(neural::forward_batch(actors_target_[k], next_obs.back()));
  }
  const Sampled next = sample_rows(next_probs, rng);
  AttentionCache next_cache, cache;
  const auto next_q = attention_critic_forward(critic_target_, next_obs, next.one_hot, next_cache);
  const auto& q = attention_critic_forward(critic_, obs, acts, cache);

  std::vector<Matrix> upstream(n, Matrix(size, kActions));
  const double scale = 2.0 / static_cast<double>(size);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t b = 0; b < size; ++b) {
      const auto na = static_cast<std::size_t>(next.actions[i][b]);
      const double soft_next =
          next_q[i](b, na) - hp_.entropy * std::log(std::max(next_probs[i](b, na), kMinProb));
      const double y = td_target(batch[b]->rewards[i], hp_.gamma, soft_next, batch[b]->done);
      const auto a = static_cast<std::size_t>(batch[b]->actions[i]);
      const double d = q[i](b, a) - y;
      loss += d * d;
      upstream[i](b, a) = scale * d;
    }
  }
  loss /= static_cast<double>(size * n);
  detail::require_finite(loss, "maac critic");

  AttentionParams grads = critic_.zeros_like();
  attention_critic_backward(critic_, cache, upstream, grads);
  neural::TensorViews params, g;
  critic_.append_views(params);
  grads.append_views(g);
  critic_opt_.step(params, g);
  soft_update(critic_, critic_target_, hp_.tau);
  return loss;
}

double MaacLearner::policy_update(Batch batch, Rng& rng) {
  check_batch(batch);
  const std::size_t n = robots_;
  const std::size_t size = batch.size();
  const double inv = 1.0 / static_cast<double>(size);

  std::vector<Matrix> obs, probs;
  std::vector<neural::MlpCache> caches(n);
  for (std::size_t k = 0; k < n; ++k) {
    obs.push_back(detail::gather_obs(batch, k, false));
    neural::forward_batch(actors_[k], obs.back(), caches[k]);
    probs.push_back(caches[k].output);
  }
  const Sampled fresh = sample_rows(probs, rng);
  AttentionCache cache;
  const auto& q = attention_critic_forward(critic_, obs, fresh.one_hot, cache);

  double total_loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    Matrix upstream(size, kActions);
    double loss = 0.0;
    for (std::size_t b = 0; b < size; ++b) {
      const auto a = static_cast<std::size_t>(fresh.actions[i][b]);
      const double p = std::max(probs[i](b, a), kMinProb);
      const double log_p = std::log(p);
      const double baseline = maac_baseline(q[i].row_span(b), probs[i].row_span(b));
      const double weight = -hp_.entropy * log_p + q[i](b, a) - baseline;
      loss -= weight * log_p * inv;
      upstream(b, a) = -weight / p * inv;
    }
    detail::require_finite(loss, "maac actor");
    Mlp grads = actors_[i].zeros_like();
    neural::backward_batch(actors_[i], caches[i], upstream, grads);
    actor_opt_[i].step(actors_[i].views(), grads.views());
    neural::soft_update(actors_[i], actors_target_[i], hp_.tau);
    total_loss += loss;
  }
  return total_loss / static_cast<double>(n);
}

std::vector<NamedNetwork> MaacLearner::networks() const {
  std::vector<NamedNetwork> out;
  for (std::size_t i = 0; i < robots_; ++i) out.push_back({"actor_" + std::to_string(i), actors_[i]});
  out.push_back({"critic_w_q", detail::wrap_matrix(critic_.w_q)});
  out.push_back({"critic_w_k", detail::wrap_matrix(critic_.w_k)});
  out.push_back({"critic_v", detail::wrap_matrix(critic_.v)});
  for (std::size_t i = 0; i < robots_; ++i) {
    const auto id = std::to_string(i);
    out.push_back({"critic_encoder_" + id, critic_.encoders[i]});
    out.push_back({"critic_sa_encoder_" + id, critic_.sa_encoders[i]});
    out.push_back({"critic_head_" + id, critic_.heads[i]});
  }
  return out;
}

void MaacLearner::load_networks(const std::vector<NamedNetwork>& nets) {
  auto load = [&](Mlp& dst, const std::string& name) {
    detail::assign_checked(dst, detail::find_network(nets, name).net, name);
  };
  for (std::size_t i = 0; i < robots_; ++i) load(actors_[i], "actor_" + std::to_string(i));
  auto load_matrix = [&](Matrix& dst, const std::string& name) {
    Mlp wrapped = detail::wrap_matrix(dst);
    load(wrapped, name);
    dst = wrapped.layers().front().weight;
  };
  load_matrix(critic_.w_q, "critic_w_q");
  load_matrix(critic_.w_k, "critic_w_k");
  load_matrix(critic_.v, "critic_v");
  for (std::size_t i = 0; i < robots_; ++i) {
    const auto id = std::to_string(i);
    load(critic_.encoders[i], "critic_encoder_" + id);
    load(critic_.sa_encoders[i], "critic_sa_encoder_" + id);
    load(critic_.heads[i], "critic_head_" + id);
  }
  actors_target_ = actors_;
  critic_target_ = critic_;
}

}  // namespace coopdrive::marl
