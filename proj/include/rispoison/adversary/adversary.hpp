#pragma once

// Training-time reward poisoning. Each strategy sees the step index and the
// learner's critic/entropy readings and decides whether to subtract a bounded
// amount from the reward before it reaches the replay buffer. Observations,
// actions, environment and learner state are never touched.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>

#include "rispoison/adversary/rolling_window.hpp"

namespace rispoison::adversary {

enum class AttackKind { none, dgrp, periodic, exploration };

std::string_view to_string(AttackKind kind);
/// Accepts none|dgrp|periodic|exploration; throws ConfigError otherwise.
AttackKind parse_attack_kind(std::string_view text);

struct AttackConfig {
  AttackKind kind = AttackKind::none;
  double delta = 1.5;       // corruption magnitude
  double p = 0.5;           // firing probability on eligible steps
  std::size_t window = 200;  // w
  double quantile = 0.75;   // q
  std::int64_t warmup = 50;  // T_warm
  std::int64_t period = 2;   // periodic baseline only
  std::uint64_t seed = 0;   // attack-owned RNG stream

  void validate() const;
};

struct AttackDecision {
  bool fired = false;
  bool eligible = false;
  double signal = 0.0;              // g_t, or the entropy estimate
  std::optional<double> threshold;  // tau_t once the window is full
  double magnitude = 0.0;           // 0 unless fired
};

/// |q1 - q2|: the norm of a scalar critic gap.
double disagreement(double q1, double q2);

/// r_true minus the decided magnitude.
double corrupt(double r_true, const AttackDecision& decision);

/// Two-stage gap-triggered rule. Pushes `signal` first, then:
/// eligible = t >= T_warm && window full && signal > Quantile_q(window);
/// fires with probability p on eligible steps; magnitude = delta.
AttackDecision dgrp_step(std::int64_t t, double signal, RollingWindow& window,
                         const AttackConfig& config, std::mt19937_64& rng);

/// Same two-stage rule driven by the policy entropy estimate.
AttackDecision exploration_step(std::int64_t t, double entropy, RollingWindow& window,
                                const AttackConfig& config, std::mt19937_64& rng);

/// Fires when t >= offset and (t - offset) % period == 0. Each firing draws
/// its magnitude from U(0, 2 * delta).
AttackDecision periodic_step(std::int64_t t, std::int64_t offset, const AttackConfig& config,
                             std::mt19937_64& rng);

/// Readings the adversary may observe at step t.
struct LearnerReadings {
  double q1 = 0.0;
  double q2 = 0.0;
  double entropy = 0.0;
};

/// Stateful attacker for one training run: owns its window and RNG stream.
class Adversary {
 public:
  explicit Adversary(AttackConfig config);

  AttackDecision decide(std::int64_t t, const LearnerReadings& readings);

  const AttackConfig& config() const { return config_; }
  std::int64_t periodic_offset() const { return offset_; }
  std::size_t fires() const { return fires_; }

 private:
  AttackConfig config_;
  std::mt19937_64 rng_;
  RollingWindow window_;
  std::int64_t offset_ = 0;
  std::size_t fires_ = 0;
};

}  // namespace rispoison::adversary
