#include "rispoison/adversary/adversary.hpp"

#include <cmath>
#include <string>

#include "rispoison/errors.hpp"

namespace rispoison::adversary {

std::string_view to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::none:
      return "none";
    case AttackKind::dgrp:
      return "dgrp";
    case AttackKind::periodic:
      return "periodic";
    case AttackKind::exploration:
      return "exploration";
  }
  return "none";
}

AttackKind parse_attack_kind(std::string_view text) {
  if (text == "none") return AttackKind::none;
  if (text == "dgrp") return AttackKind::dgrp;
  if (text == "periodic") return AttackKind::periodic;
  if (text == "exploration") return AttackKind::exploration;
  throw ConfigError("unknown attack kind '" + std::string(text) +
                    "' (expected none|dgrp|periodic|exploration)");
}

void AttackConfig::validate() const {
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw ConfigError("attack.delta must be >= 0");
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("attack.p must lie in [0, 1]");
  if (window == 0) throw ConfigError("attack.w must be >= 1");
  if (!(quantile > 0.0 && quantile < 1.0)) throw ConfigError("attack.q must lie in (0, 1)");
  if (warmup < 0) throw ConfigError("attack.t_warm must be >= 0");
  if (period < 1) throw ConfigError("attack.period must be >= 1");
}

double disagreement(double q1, double q2) { return std::abs(q1 - q2); }

double corrupt(double r_true, const AttackDecision& decision) { return r_true - decision.magnitude; }

namespace {

AttackDecision gated_step(std::int64_t t, double signal, RollingWindow& window,
                          const AttackConfig& config, std::mt19937_64& rng) {
  AttackDecision d;
  d.signal = signal;
  window.push(signal);
  d.threshold = window.quantile(config.quantile);
  d.eligible = t >= config.warmup && d.threshold.has_value() && signal > *d.threshold;
  if (d.eligible) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    d.fired = coin(rng) < config.p;
    d.magnitude = d.fired ? config.delta : 0.0;
  }
  return d;
}

}  // namespace

AttackDecision dgrp_step(std::int64_t t, double signal, RollingWindow& window,
                         const AttackConfig& config, std::mt19937_64& rng) {
  return gated_step(t, signal, window, config, rng);
}

AttackDecision exploration_step(std::int64_t t, double entropy, RollingWindow& window,
                                const AttackConfig& config, std::mt19937_64& rng) {
  return gated_step(t, entropy, window, config, rng);
}

AttackDecision periodic_step(std::int64_t t, std::int64_t offset, const AttackConfig& config,
                             std::mt19937_64& rng) {
  AttackDecision d;
  d.eligible = t >= offset && (t - offset) % config.period == 0;
  d.fired = d.eligible;
  if (d.fired) {
    std::uniform_real_distribution<double> strength(0.0, 2.0 * config.delta);
    d.magnitude = strength(rng);
  }
  return d;
}

Adversary::Adversary(AttackConfig config)
    : config_(config), rng_(config.seed), window_(config.window) {
  config_.validate();
  if (config_.kind == AttackKind::periodic) {
    std::uniform_int_distribution<std::int64_t> phase(0, config_.period - 1);
    offset_ = phase(rng_);
  }
}

AttackDecision Adversary::decide(std::int64_t t, const LearnerReadings& readings) {
  AttackDecision d;
  switch (config_.kind) {
    case AttackKind::none:
      break;
    case AttackKind::dgrp:
      d = dgrp_step(t, disagreement(readings.q1, readings.q2), window_, config_, rng_);
      break;
    case AttackKind::periodic:
      d = periodic_step(t, offset_, config_, rng_);
      break;
    case AttackKind::exploration:
      d = exploration_step(t, readings.entropy, window_, config_, rng_);
      break;
  }
  if (d.fired) ++fires_;
  return d;
}

}  // namespace rispoison::adversary
