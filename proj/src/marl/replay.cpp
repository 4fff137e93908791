#include "coopdrive/marl/replay.hpp"

#include <stdexcept>

namespace coopdrive::marl {

namespace {

std::vector<double> concat(const std::vector<Observation>& obs) {
  std::vector<double> out;
  for (const auto& o : obs) out.insert(out.end(), o.begin(), o.end());
  return out;
}

}  // namespace

std::vector<double> Transition::state() const { return concat(observations); }
std::vector<double> Transition::next_state() const { return concat(next_observations); }

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
}

void ReplayBuffer::push(Transition tr) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(tr));
    return;
  }
  items_[head_] = std::move(tr);
  head_ = (head_ + 1) % capacity_;
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t n, Rng& rng) const {
  if (items_.empty()) throw ReplayError("cannot sample from an empty replay buffer");
  if (n == 0) throw std::invalid_argument("sample size must be at least 1");
  std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
  std::vector<const Transition*> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(&items_[pick(rng)]);
  return out;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= items_.size()) throw std::out_of_range("replay index out of range");
  return items_[(head_ + i) % items_.size()];
}

}  // namespace coopdrive::marl
