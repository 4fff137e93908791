#include "coopdrive/marl/value.hpp"

#include <stdexcept>

namespace coopdrive::marl {

int argmax(std::span<const double> q) {
  if (q.empty()) throw std::invalid_argument("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < q.size(); ++i) {
    if (q[i] > q[best]) best = i;
  }
  return static_cast<int>(best);
}

int select_action_eps_greedy(std::span<const double> q, double epsilon, Rng& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon outside [0,1]");
  if (uniform01(rng) < epsilon) return uniform_int(rng, 0, static_cast<int>(q.size()) - 1);
  return argmax(q);
}

double td_target(double reward, double gamma, double next_q_max, bool terminal) {
  return terminal ? reward : reward + gamma * next_q_max;
}

double vdn_total(std::span<const double> q_values) {
  if (q_values.empty()) throw std::invalid_argument("vdn_total needs at least one robot");
  double sum = 0.0;
  for (double q : q_values) sum += q;
  return sum;
}

}  // namespace coopdrive::marl
