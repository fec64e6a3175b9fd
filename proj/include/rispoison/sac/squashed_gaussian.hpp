#pragma once

#include <numbers>

namespace rispoison::sac {

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;

/// log N(pre_tanh; mean, exp(log_std)) - log(1 - tanh(pre_tanh)^2), the
/// density of a = tanh(pre_tanh) for one action dimension. The Jacobian term
/// uses log(1 - tanh(u)^2) = 2 (log 2 - u - softplus(-2u)), which stays
/// finite for large |u|.
double squashed_log_prob(double pre_tanh, double mean, double log_std);

/// Same density expressed in the squashed action a in (-1, 1).
double squashed_log_prob_of_action(double action, double mean, double log_std);

inline constexpr double kHalfLogTwoPi = 0.91893853320467274178032973640562;

}  // namespace rispoison::sac
