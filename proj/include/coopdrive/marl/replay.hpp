#pragma once

#include <cstddef>
#include <vector>

#include "coopdrive/env.hpp"
#include "coopdrive/rng.hpp"

namespace coopdrive::marl {

/// One joint step. Per-robot vectors are indexed by learner slot.
struct Transition {
  std::vector<Observation> observations;
  std::vector<int> actions;
  std::vector<double> rewards;  // per-robot r_total
  double team_reward = 0.0;
  std::vector<Observation> next_observations;
  bool done = false;

  std::size_t arity() const { return actions.size(); }
  /// Joint state: learner observations concatenated in slot order.
  std::vector<double> state() const;
  std::vector<double> next_state() const;

  friend bool operator==(const Transition&, const Transition&) = default;
};

class ReplayError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fixed-capacity FIFO ring with uniform sampling (with replacement).
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 100000);

  void push(Transition tr);
  /// `n` independent uniform draws over the current contents.
  std::vector<const Transition*> sample(std::size_t n, Rng& rng) const;

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }
  /// i-th oldest transition.
  const Transition& at(std::size_t i) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // slot of the oldest transition once full
  std::vector<Transition> items_;
};

}  // namespace coopdrive::marl
