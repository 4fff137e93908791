#pragma once

#include <span>

#include "coopdrive/rng.hpp"

namespace coopdrive::marl {

/// Index of the largest entry; ties go to the lowest index.
int argmax(std::span<const double> q);

/// Always consumes one uniform draw; a second (the random action) only when
/// exploring.
int select_action_eps_greedy(std::span<const double> q, double epsilon, Rng& rng);

/// r + gamma * next_q_max, with no bootstrap on terminal transitions.
double td_target(double reward, double gamma, double next_q_max, bool terminal = false);

/// Sum of per-robot chosen Q values. Throws std::invalid_argument when empty.
double vdn_total(std::span<const double> q_values);

}  // namespace coopdrive::marl
