#pragma once

#include "coopdrive/rng.hpp"

namespace coopdrive {

/// Car-following parameters for rule-driven (social) robots.
struct IDMParams {
  double v_f = 0.26;      // desired free-flow speed (m/s)
  double a = 0.1;         // maximum acceleration (m/s^2)
  double b = 0.1;         // comfortable deceleration (m/s^2)
  double s0 = 0.1;        // minimum safe gap (m)
  double headway = 1.0;   // reaction / headway time (s)
  double mu = 0.0;        // perception-offset mean (m)
  double sigma = 0.02;    // perception-offset standard deviation (m)

  friend bool operator==(const IDMParams&, const IDMParams&) = default;
};

void validate(const IDMParams& p);

/// Expected following distance
///   S0 + max(v * headway + v * dv / (2 sqrt(a b)), 0) + perception_offset
/// where dv is the closing speed (follower minus leader).
double desired_gap(double v, double dv, const IDMParams& p, double perception_offset = 0.0);

/// Classic intelligent-driver acceleration a (1 - (v/v_f)^4 - (gap*/gap)^2).
/// Throws std::domain_error when `gap` is not positive.
double idm_accel(double v, double gap, double dv, const IDMParams& p);

/// Acceleration given an explicit perception offset. The interaction term is
/// dropped whenever the resulting desired gap is not positive.
double gated_idm_accel(double v, double gap, double dv, const IDMParams& p,
                       double perception_offset);

/// Perception-uncertainty variant: draws one offset ~ Normal(mu, sigma^2)
/// from `rng` (always exactly one standard-normal draw) and evaluates
/// gated_idm_accel with it.
double pu_idm_accel(double v, double gap, double dv, const IDMParams& p, Rng& rng);

}  // namespace coopdrive
