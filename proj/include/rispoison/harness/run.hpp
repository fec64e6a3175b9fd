#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rispoison/harness/config.hpp"

namespace rispoison::harness {

/// One environment step as seen by the experiment log.
struct StepRecord {
  std::int64_t t = 0;
  double r_true = 0.0;   // clean SU rate
  double r_train = 0.0;  // reward handed to the learner
  bool fired = false;
  bool eligible = false;
  double signal = 0.0;     // critic gap (or entropy for the exploration attack)
  double threshold = 0.0;  // NaN until the rolling window fills
  double power = 0.0;      // executed P_s
  double cap = 0.0;        // min(P_m, I / g_p) at this step
  double rate = 0.0;       // SU rate of the executed action (== r_true)
  double critic_loss1 = 0.0;
  double critic_loss2 = 0.0;
  double actor_loss = 0.0;
  double eval_rate = 0.0;  // deterministic policy on the same channels; NaN outside eval tail
};

struct RunSummary {
  bool failed = false;
  std::string failure;
  double final_mean_rate = 0.0;  // clean-reward moving average, last 10% of steps
  double eval_mean_rate = 0.0;   // mean eval_rate over the eval tail
  std::size_t total_fires = 0;
  double fire_rate = 0.0;  // fires / (total_steps - T_warm)
  std::size_t clamped_actions = 0;
};

struct RunLog {
  std::uint64_t seed = 0;
  std::vector<StepRecord> steps;
  RunSummary summary;
};

/// Independent RNG streams derived from one experiment seed.
struct StreamSeeds {
  std::uint64_t env = 0;
  std::uint64_t agent_init = 0;
  std::uint64_t agent_sampling = 0;
  std::uint64_t attack = 0;
};
StreamSeeds derive_streams(std::uint64_t seed);

/// Hook invoked after each step with the agent, for trajectory checks in tests.
using StepObserver = std::function<void(std::int64_t t, const sac::SacAgent& agent)>;

/// Trains one SAC learner for cfg.total_steps under cfg.attack. Numerical
/// divergence does not throw: the log is truncated and summary.failed set.
RunLog run_training(const RunConfig& cfg, std::uint64_t seed, const StepObserver& observer = {});

/// Clean rates of a uniform-random policy on the same channel sequence a
/// training run with this seed sees.
std::vector<double> random_policy_rates(const RunConfig& cfg, std::uint64_t seed);

/// Mean of the trailing moving average over the last `fraction` of steps.
double final_mean_rate(const RunLog& log, std::size_t ma_window, double fraction = 0.1);

}  // namespace rispoison::harness
