#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "rispoison/nn/adam.hpp"
#include "rispoison/nn/mlp.hpp"
#include "rispoison/sac/replay_buffer.hpp"

namespace rispoison::sac {

struct SacConfig {
  double gamma = 1.0;
  double learning_rate = 1e-3;
  double entropy_coef = 0.2;  // e_s; initial value when auto_entropy is on
  std::size_t batch_size = 16;
  std::size_t buffer_capacity = 20000;
  double polyak = 0.005;
  double target_clip = 100.0;  // |U| bound on critic targets
  std::size_t warm_start = 100;  // uniform-random action steps
  std::size_t updates_per_step = 1;
  std::size_t hidden_width = 64;
  std::size_t hidden_layers = 2;
  bool auto_entropy = false;
  double target_entropy = 0.0;  // 0 means -(action dimension)
  bool normalize_rewards = false;
  // Continuing-task bootstrap: subtract a running estimate of the soft
  // reward rate from every target so gamma = 1 values stay bounded.
  bool average_reward = true;
  double average_reward_rate = 0.01;  // EMA step for the reward-rate estimate

  void validate() const;
  friend bool operator==(const SacConfig&, const SacConfig&) = default;
};

enum class ActionMode { stochastic, deterministic };

struct ActionSample {
  std::vector<double> raw;  // in (-1, 1)
  double log_prob = 0.0;
  double entropy = 0.0;  // single-sample estimate, -log_prob
};

struct Introspection {
  double q1 = 0.0;
  double q2 = 0.0;
  double entropy = 0.0;  // -log pi(a | s) under the current actor
};

struct Transition {
  std::span<const double> obs;
  std::span<const double> action;
  double reward = 0.0;  // reward the learner is trained on (possibly poisoned)
  std::span<const double> next_obs;
};

struct UpdateStats {
  bool updated = false;
  double critic_loss1 = 0.0;
  double critic_loss2 = 0.0;
  double actor_loss = 0.0;
  double entropy_coef = 0.0;
};

/// Per-sample critic target, clamped to [-target_clip, target_clip]:
///   U = (r - reward_rate) + gamma * (min(q1', q2') - e_s * log_prob'),
/// with no done mask. Column vectors, M x 1. reward_rate is 0 for the
/// discounted form.
nn::Array2 critic_target(const nn::Array2& reward, const nn::Array2& next_q1,
                         const nn::Array2& next_q2, const nn::Array2& next_log_prob, double gamma,
                         double entropy_coef, double target_clip, double reward_rate = 0.0);

/// Soft actor-critic for a continuing task: squashed-Gaussian actor, twin
/// critics with Polyak-averaged targets.
///
/// Randomness comes from two streams fixed at construction: `init_seed`
/// (network weights) and `sample_seed` (exploration noise, replay sampling).
/// introspect() touches neither.
class SacAgent {
 public:
  SacAgent(SacConfig config, std::size_t obs_dim, std::size_t act_dim, std::uint64_t init_seed,
           std::uint64_t sample_seed);

  /// During the first warm_start transitions, stochastic mode draws uniform
  /// actions on [-1, 1]. Throws DivergenceError on non-finite actor output.
  ActionSample select_action(std::span<const double> obs, ActionMode mode);

  /// Online critic values at (s, a) and the policy's -log pi(a | s). Pure.
  Introspection introspect(std::span<const double> obs, std::span<const double> action) const;

  /// Stores the transition; once more than max(warm_start, batch_size)
  /// transitions have been seen, runs updates_per_step rounds of
  /// critic update, actor update, Polyak update.
  UpdateStats train_step(const Transition& transition);

  // Individual update stages, exposed for tests.
  std::pair<double, double> update_critics(const Batch& batch);
  double update_actor(const Batch& batch);
  void update_entropy(const Batch& batch);
  void polyak_update();
  void polyak_update(double rate);
  /// Targets for `batch` as used by update_critics (consumes sampling noise).
  nn::Array2 compute_targets(const Batch& batch);
  /// Same, with the next-action Gaussian noise supplied (M x act_dim).
  nn::Array2 compute_targets(const Batch& batch, const nn::Array2& noise);

  struct ActorObjective {
    double loss = 0.0;
    std::vector<nn::Array2> gradients;  // d loss / d actor parameters, forward() order
  };
  /// Actor loss mean(e_s * log pi(a|s) - min_i Q_i(s, a)) with a reparameterized
  /// from `noise` (M x act_dim); critics are held fixed. No parameter update.
  ActorObjective actor_objective(const Batch& batch, const nn::Array2& noise) const;

  const SacConfig& config() const { return config_; }
  std::size_t obs_dim() const { return obs_dim_; }
  std::size_t act_dim() const { return act_dim_; }
  std::size_t transitions_seen() const { return transitions_; }
  std::size_t update_rounds() const { return update_rounds_; }
  double entropy_coef() const;
  /// Current soft reward-rate estimate (0 unless average_reward).
  double reward_rate() const { return reward_rate_; }
  const ReplayBuffer& replay() const { return replay_; }

  nn::Mlp& actor() { return actor_; }
  nn::Mlp& critic(int i) { return i == 0 ? critic1_ : critic2_; }
  nn::Mlp& target_critic(int i) { return i == 0 ? target1_ : target2_; }
  const nn::Mlp& actor() const { return actor_; }
  const nn::Mlp& critic(int i) const { return i == 0 ? critic1_ : critic2_; }
  const nn::Mlp& target_critic(int i) const { return i == 0 ? target1_ : target2_; }

  /// Policy head for a batch of observations: mean and clamped log-std, each rows x act_dim.
  std::pair<nn::Array2, nn::Array2> policy_head(const nn::Array2& obs) const;

  bool parameters_finite() const;
  friend bool operator==(const SacAgent&, const SacAgent&) = default;

 private:
  struct Sampled {
    nn::Array2 action;
    nn::Array2 log_prob;  // rows x 1
  };
  Sampled sample_batch_actions(const nn::Array2& obs);
  Sampled squash(const nn::Array2& obs, const nn::Array2& noise) const;
  nn::Array2 draw_noise(std::size_t rows);
  nn::Array2 critic_input(const nn::Array2& obs, const nn::Array2& action) const;
  double normalize(double reward);

  SacConfig config_;
  std::size_t obs_dim_;
  std::size_t act_dim_;
  std::mt19937_64 sample_rng_;
  nn::Mlp actor_;
  nn::Mlp critic1_;
  nn::Mlp critic2_;
  nn::Mlp target1_;
  nn::Mlp target2_;
  nn::Adam actor_opt_;
  nn::Adam critic1_opt_;
  nn::Adam critic2_opt_;
  double reward_rate_ = 0.0;
  bool reward_rate_init_ = false;
  double log_alpha_ = 0.0;
  double alpha_m_ = 0.0;
  double alpha_v_ = 0.0;
  std::int64_t alpha_steps_ = 0;
  ReplayBuffer replay_;
  std::size_t transitions_ = 0;
  std::size_t update_rounds_ = 0;
  // Running reward statistics (Welford), used only when normalize_rewards.
  std::int64_t reward_count_ = 0;
  double reward_mean_ = 0.0;
  double reward_m2_ = 0.0;
};

}  // namespace rispoison::sac
