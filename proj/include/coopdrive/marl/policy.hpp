#pragma once

#include <span>

#include "coopdrive/rng.hpp"

namespace coopdrive::marl {

inline constexpr double kNormalizationTolerance = 1e-6;

/// Throws std::invalid_argument unless `pi` is a probability vector to within
/// kNormalizationTolerance.
void check_distribution(std::span<const double> pi);

/// Counterfactual advantage q_row[a] - pi . q_row.
double coma_advantage(std::span<const double> q_row, std::span<const double> pi, int action);

/// Expected own-action value pi . q.
double maac_baseline(std::span<const double> q_over_own_actions, std::span<const double> pi);

/// Inverse-CDF draw from a categorical distribution; one uniform draw.
int sample_categorical(std::span<const double> pi, Rng& rng);

double entropy(std::span<const double> pi);

}  // namespace coopdrive::marl
