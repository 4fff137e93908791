#include "coopdrive/marl/policy.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace coopdrive::marl {

void check_distribution(std::span<const double> pi) {
  double sum = 0.0;
  for (double p : pi) {
    if (!(p >= 0.0)) throw std::invalid_argument("policy has a negative or NaN probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kNormalizationTolerance) {
    throw std::invalid_argument("policy sums to " + std::to_string(sum) + ", not 1");
  }
}

double coma_advantage(std::span<const double> q_row, std::span<const double> pi, int action) {
  if (q_row.size() != pi.size()) throw std::invalid_argument("q_row and pi differ in length");
  if (action < 0 || static_cast<std::size_t>(action) >= q_row.size()) {
    throw std::out_of_range("action outside the Q row");
  }
  return q_row[static_cast<std::size_t>(action)] - maac_baseline(q_row, pi);
}

double maac_baseline(std::span<const double> q_over_own_actions, std::span<const double> pi) {
  if (q_over_own_actions.size() != pi.size()) throw std::invalid_argument("q and pi differ in length");
  check_distribution(pi);
  double b = 0.0;
  for (std::size_t k = 0; k < pi.size(); ++k) b += pi[k] * q_over_own_actions[k];
  return b;
}

int sample_categorical(std::span<const double> pi, Rng& rng) {
  if (pi.empty()) throw std::invalid_argument("empty distribution");
  const double u = uniform01(rng);
  double cum = 0.0;
  for (std::size_t k = 0; k < pi.size(); ++k) {
    cum += pi[k];
    if (u < cum) return static_cast<int>(k);
  }
  // Rounding left u above the running sum: take the last action with mass.
  for (std::size_t k = pi.size(); k-- > 0;) {
    if (pi[k] > 0.0) return static_cast<int>(k);
  }
  return static_cast<int>(pi.size()) - 1;
}

double entropy(std::span<const double> pi) {
  double h = 0.0;
  for (double p : pi) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

}  // namespace coopdrive::marl
