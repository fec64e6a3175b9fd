#include "rispoison/sac/squashed_gaussian.hpp"

#include <algorithm>
#include <cmath>

namespace rispoison::sac {
namespace {
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
}  // namespace

double squashed_log_prob(double pre_tanh, double mean, double log_std) {
  const double z = (pre_tanh - mean) / std::exp(log_std);
  const double gaussian = -0.5 * z * z - log_std - kHalfLogTwoPi;
  const double log_jacobian = 2.0 * (std::numbers::ln2 - pre_tanh - softplus(-2.0 * pre_tanh));
  return gaussian - log_jacobian;
}

double squashed_log_prob_of_action(double action, double mean, double log_std) {
  constexpr double kEdge = 1.0 - 1e-12;
  return squashed_log_prob(std::atanh(std::clamp(action, -kEdge, kEdge)), mean, log_std);
}

}  // namespace rispoison::sac
