#pragma once

// Closed-form recovery conditions and success probabilities.

#include <algorithm>
#include <cmath>
#include <string>

#include "qrecover/channelbank.hpp"
#include "qrecover/error.hpp"

namespace qrecover {

struct RecoveryParams {
  Strength p;  // pre-measurement strength
  Strength q;  // post-measurement strength
  Strength r;  // damping probability

  RecoveryParams() = default;
  RecoveryParams(double p_, double q_, double r_) : p(p_), q(q_), r(r_) {}
  RecoveryParams(Strength p_, Strength q_, Strength r_) : p(p_), q(q_), r(r_) {}
};

// Slack for grid values that land on the feasibility boundary up to rounding.
inline constexpr double kFeasibilitySlack = 1e-12;

// Smallest p for which the complete-recovery q is non-negative.
inline Strength min_pre_strength(Strength r) {
  return Strength((1.0 - r) / (2.0 - r));
}

inline void check_complete_recovery_feasible(Strength p, Strength r) {
  if (p.value() == 0.0)
    throw Error(Errc::ZeroStrength, "complete recovery needs p > 0");
  const double p_min = min_pre_strength(r);
  if (p.value() < p_min - kFeasibilitySlack)
    throw Error(Errc::Infeasible, "complete recovery needs p >= (1-r)/(2-r) = " +
                                      std::to_string(p_min) + ", got p = " + std::to_string(p.value()));
}

// q = 1 - (1-p)(1-r)/p: makes N_b F_b e_00 F_b M_b proportional to I.
inline Strength complete_recovery_q(Strength p, Strength r) {
  check_complete_recovery_feasible(p, r);
  const double q = 1.0 - (1.0 - p) * (1.0 - r) / p;
  return Strength(std::clamp(q, 0.0, 1.0));
}

inline RecoveryParams complete_recovery_params(Strength p, Strength r) {
  return RecoveryParams(p, complete_recovery_q(p, r), r);
}

// Total success probability for arbitrary (p, q, r); independent of the state.
inline double general_success(Strength p, Strength q, Strength r) {
  const double inner = p * q + q * r - p * q * r - 1.0;
  return inner * inner;
}

inline double general_success(const RecoveryParams& params) {
  return general_success(params.p, params.q, params.r);
}

// Success probability under the complete-recovery q.
inline double complete_recovery_success(Strength p, Strength r) {
  check_complete_recovery_feasible(p, r);
  const double a = (1.0 - p) * (1.0 - r) * (2.0 * p + r - p * r) / p;
  return a * a;
}

}  // namespace qrecover
