#include "coopdrive/marl/learner.hpp"
#include "coopdrive/marl/value.hpp"
#include "internal.hpp"

namespace coopdrive::marl {

using detail::kActions;
using neural::OutputActivation;

ValueLearner::ValueLearner(Algo algo, std::size_t robots, std::size_t obs_dim, const Hyperparams& hp, Rng& rng)
    : Learner(robots, obs_dim, hp), algo_(algo), replay_(hp.buffer_capacity) {
  if (algo != Algo::kIdqn && algo != Algo::kVdn && algo != Algo::kQmix) {
    throw std::invalid_argument("ValueLearner handles idqn, vdn and qmix only");
  }
  for (std::size_t i = 0; i < robots; ++i) {
    q_.emplace_back(std::initializer_list<std::size_t>{obs_dim, hp.hidden, hp.hidden, kActions},
                    OutputActivation::kLinear, rng);
  }
  q_target_ = q_;
  if (algo == Algo::kQmix) {
    mixer_ = MixerParams(robots, robots * obs_dim, hp.mixer_embed, hp.hidden, rng);
    mixer_target_ = mixer_;
  }
  const std::size_t groups = algo == Algo::kIdqn ? robots : 1;
  optimizers_.assign(groups, Optimizer{{}, hp.lr, hp.grad_clip});
}

std::vector<int> ValueLearner::explore(const std::vector<Observation>& obs, double epsilon, Rng& rng) {
  std::vector<int> actions;
  for (std::size_t i = 0; i < robots_; ++i) {
    actions.push_back(select_action_eps_greedy(neural::mlp_forward(q_[i], obs[i]), epsilon, rng));
  }
  return actions;
}

std::vector<int> ValueLearner::greedy(const std::vector<Observation>& obs) const {
  std::vector<int> actions;
  for (std::size_t i = 0; i < robots_; ++i) actions.push_back(argmax(neural::mlp_forward(q_[i], obs[i])));
  return actions;
}

Learner::Losses ValueLearner::observe(const Transition& tr, Rng& rng) {
  replay_.push(tr);
  if (replay_.size() < hp_.batch) return {};
  const auto batch = replay_.sample(hp_.batch, rng);
  return {critic_update(batch, rng), std::nullopt};
}

double ValueLearner::critic_update(Batch batch, Rng&) {
  check_batch(batch);
  const std::size_t n = robots_;
  const std::size_t size = batch.size();
  const double scale = 2.0 / static_cast<double>(size);

  std::vector<neural::MlpCache> caches(n);
  std::vector<std::vector<int>> acts(n);
  std::vector<std::vector<double>> next_max(n, std::vector<double>(size));
  for (std::size_t i = 0; i < n; ++i) {
    neural::forward_batch(q_[i], detail::gather_obs(batch, i, false), caches[i]);
    const Matrix next_q = neural::forward_batch(q_target_[i], detail::gather_obs(batch, i, true));
    for (std::size_t b = 0; b < size; ++b) next_max[i][b] = next_q(b, static_cast<std::size_t>(argmax(next_q.row_span(b))));
    acts[i] = detail::column(batch, i);
  }
  auto chosen = [&](std::size_t i, std::size_t b) { return caches[i].output(b, static_cast<std::size_t>(acts[i][b])); };

  std::vector<Matrix> upstream(n, Matrix(size, kActions));
  double loss = 0.0;
  MixerParams mixer_grads;
  if (algo_ == Algo::kIdqn) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t b = 0; b < size; ++b) {
        const double y = td_target(batch[b]->team_reward, hp_.gamma, next_max[i][b], batch[b]->done);
        const double d = chosen(i, b) - y;
        loss += d * d;
        upstream[i](b, static_cast<std::size_t>(acts[i][b])) = scale * d;
      }
    }
    loss /= static_cast<double>(size * n);
  } else if (algo_ == Algo::kVdn) {
    std::vector<double> q(n), qn(n);
    for (std::size_t b = 0; b < size; ++b) {
      for (std::size_t i = 0; i < n; ++i) {
        q[i] = chosen(i, b);
        qn[i] = next_max[i][b];
      }
      const double y = td_target(batch[b]->team_reward, hp_.gamma, vdn_total(qn), batch[b]->done);
      const double d = vdn_total(q) - y;
      loss += d * d;
      for (std::size_t i = 0; i < n; ++i) upstream[i](b, static_cast<std::size_t>(acts[i][b])) = scale * d;
    }
    loss /= static_cast<double>(size);
  } else {
    Matrix q(size, n), qn(size, n);
    for (std::size_t b = 0; b < size; ++b) {
      for (std::size_t i = 0; i < n; ++i) {
        q(b, i) = chosen(i, b);
        qn(b, i) = next_max[i][b];
      }
    }
    MixerCache cache, next_cache;
    const auto total = qmix_forward_batch(mixer_, q, detail::gather_state(batch, false), cache);
    const auto next_total = qmix_forward_batch(mixer_target_, qn, detail::gather_state(batch, true), next_cache);
    std::vector<double> g(size);
    for (std::size_t b = 0; b < size; ++b) {
      const double d = total[b] - td_target(batch[b]->team_reward, hp_.gamma, next_total[b], batch[b]->done);
      loss += d * d;
      g[b] = scale * d;
    }
    loss /= static_cast<double>(size);
    mixer_grads = mixer_.zeros_like();
    Matrix dq;
    qmix_backward_batch(mixer_, cache, g, mixer_grads, dq);
    for (std::size_t b = 0; b < size; ++b) {
      for (std::size_t i = 0; i < n; ++i) upstream[i](b, static_cast<std::size_t>(acts[i][b])) = dq(b, i);
    }
  }
  detail::require_finite(loss, algo_name(algo_) + " critic");

  std::vector<Mlp> grads;
  for (std::size_t i = 0; i < n; ++i) {
    grads.push_back(q_[i].zeros_like());
    neural::backward_batch(q_[i], caches[i], upstream[i], grads[i]);
  }
  if (algo_ == Algo::kIdqn) {
    for (std::size_t i = 0; i < n; ++i) optimizers_[i].step(q_[i].views(), grads[i].views());
  } else {
    auto params = detail::views_of(q_);
    auto g = detail::views_of(grads);
    if (algo_ == Algo::kQmix) {
      mixer_.append_views(params);
      mixer_grads.append_views(g);
    }
    optimizers_[0].step(params, g);
  }

  for (std::size_t i = 0; i < n; ++i) neural::soft_update(q_[i], q_target_[i], hp_.tau);
  if (algo_ == Algo::kQmix) soft_update(mixer_, mixer_target_, hp_.tau);
  return loss;
}

std::vector<NamedNetwork> ValueLearner::networks() const {
  std::vector<NamedNetwork> out;
  for (std::size_t i = 0; i < robots_; ++i) out.push_back({"q_" + std::to_string(i), q_[i]});
  if (algo_ == Algo::kQmix) {
    out.push_back({"mixer_w1", mixer_.hyper_w1});
    out.push_back({"mixer_b1", mixer_.hyper_b1});
    out.push_back({"mixer_w2", mixer_.hyper_w2});
    out.push_back({"mixer_b2", mixer_.hyper_b2});
  }
  return out;
}

void ValueLearner::load_networks(const std::vector<NamedNetwork>& nets) {
  for (std::size_t i = 0; i < robots_; ++i) {
    const std::string name = "q_" + std::to_string(i);
    detail::assign_checked(q_[i], detail::find_network(nets, name).net, name);
  }
  q_target_ = q_;
  if (algo_ == Algo::kQmix) {
    detail::assign_checked(mixer_.hyper_w1, detail::find_network(nets, "mixer_w1").net, "mixer_w1");
    detail::assign_checked(mixer_.hyper_b1, detail::find_network(nets, "mixer_b1").net, "mixer_b1");
    detail::assign_checked(mixer_.hyper_w2, detail::find_network(nets, "mixer_w2").net, "mixer_w2");
    detail::assign_checked(mixer_.hyper_b2, detail::find_network(nets, "mixer_b2").net, "mixer_b2");
    mixer_target_ = mixer_;
  }
}

}  // namespace coopdrive::marl
