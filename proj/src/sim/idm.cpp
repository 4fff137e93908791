#include "coopdrive/idm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace coopdrive {

void validate(const IDMParams& p) {
  if (!(p.v_f > 0.0)) throw std::invalid_argument("social_agent.v_f must be positive");
  if (!(p.a > 0.0)) throw std::invalid_argument("social_agent.a must be positive");
  if (!(p.b > 0.0)) throw std::invalid_argument("social_agent.b must be positive");
  if (!(p.s0 >= 0.0)) throw std::invalid_argument("social_agent.s0 must be nonnegative");
  if (!(p.headway >= 0.0)) throw std::invalid_argument("social_agent.headway must be nonnegative");
  if (!(p.sigma >= 0.0)) throw std::invalid_argument("social_agent.sigma must be nonnegative");
}

double desired_gap(double v, double dv, const IDMParams& p, double perception_offset) {
  const double dynamic = v * p.headway + v * dv / (2.0 * std::sqrt(p.a * p.b));
  return p.s0 + std::max(dynamic, 0.0) + perception_offset;
}

namespace {

double free_road_term(double v, const IDMParams& p) {
  const double r = v / p.v_f;
  const double r2 = r * r;
  return r2 * r2;
}

void require_positive_gap(double gap) {
  if (!(gap > 0.0)) throw std::domain_error("IDM follow state needs a positive gap");
}

}  // namespace

double idm_accel(double v, double gap, double dv, const IDMParams& p) {
  require_positive_gap(gap);
  const double ratio = desired_gap(v, dv, p) / gap;
  return p.a * (1.0 - free_road_term(v, p) - ratio * ratio);
}

double gated_idm_accel(double v, double gap, double dv, const IDMParams& p,
                       double perception_offset) {
  require_positive_gap(gap);
  const double expected = desired_gap(v, dv, p, perception_offset);
  if (!(expected > 0.0)) return p.a * (1.0 - free_road_term(v, p));
  const double ratio = expected / gap;
  return p.a * (1.0 - free_road_term(v, p) - ratio * ratio);
}

double pu_idm_accel(double v, double gap, double dv, const IDMParams& p, Rng& rng) {
  require_positive_gap(gap);
  const double offset = p.mu + p.sigma * standard_normal(rng);
  return gated_idm_accel(v, gap, dv, p, offset);
}

}  // namespace coopdrive
