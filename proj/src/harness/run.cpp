#include "rispoison/harness/run.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "rispoison/errors.hpp"
#include "rispoison/harness/aggregate.hpp"

namespace rispoison::harness {

StreamSeeds derive_streams(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    0x5eedu};
  std::uint32_t words[8];
  seq.generate(std::begin(words), std::end(words));
  auto join = [&](int i) {
    return (static_cast<std::uint64_t>(words[2 * i]) << 32) | words[2 * i + 1];
  };
  return {join(0), join(1), join(2), join(3)};
}

double final_mean_rate(const RunLog& log, std::size_t ma_window, double fraction) {
  if (log.steps.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::vector<double> clean;
  clean.reserve(log.steps.size());
  for (const StepRecord& s : log.steps) clean.push_back(s.r_true);
  const std::vector<double> ma = trailing_moving_average(clean, ma_window);
  const auto tail = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(ma.size()))));
  double sum = 0.0;
  for (std::size_t i = ma.size() - tail; i < ma.size(); ++i) sum += ma[i];
  return sum / static_cast<double>(tail);
}

RunLog run_training(const RunConfig& cfg, std::uint64_t seed, const StepObserver& observer) {
  cfg.validate();
  const StreamSeeds streams = derive_streams(seed);
  const std::size_t ris = cfg.env.ris_elements;

  env::EnvConfig env_cfg = cfg.env;
  env_cfg.seed = streams.env;
  env::CrnRisEnv environment(env_cfg);
  sac::SacAgent agent(cfg.sac, env::observation_size(ris), env::action_size(ris),
                      streams.agent_init, streams.agent_sampling);
  adversary::AttackConfig attack_cfg = cfg.attack;
  attack_cfg.seed = streams.attack;
  adversary::Adversary attacker(attack_cfg);

  RunLog log;
  log.seed = seed;
  log.steps.reserve(static_cast<std::size_t>(cfg.total_steps));
  const std::int64_t eval_from = cfg.total_steps - static_cast<std::int64_t>(cfg.eval_tail);
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

  std::vector<double> obs = environment.observation();
  try {
    for (std::int64_t t = 0; t < cfg.total_steps; ++t) {
      StepRecord rec;
      rec.t = t;
      rec.eval_rate = kNaN;
      if (t >= eval_from) {
        // Deterministic action scored on the current channels; the
        // environment and sampling streams are not advanced.
        const auto [mean, log_std] = agent.policy_head(nn::Array2::row(obs));
        std::vector<double> raw(mean.size());
        for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = std::tanh(mean[i]);
        const auto decoded = env::decode_action(raw, environment.current_cap());
        const auto& ch = environment.channels();
        rec.eval_rate = env::rate(env::snr(decoded.power,
                                           env::effective_gain(ch.h1, decoded.phases, ch.h2),
                                           cfg.env.noise));
      }

      const sac::ActionSample action = agent.select_action(obs, sac::ActionMode::stochastic);
      env::StepResult step = environment.step(action.raw);
      const sac::Introspection view = agent.introspect(obs, action.raw);
      const adversary::AttackDecision decision =
          attacker.decide(t, {view.q1, view.q2, view.entropy});
      const double r_train = adversary::corrupt(step.reward, decision);

      const sac::UpdateStats stats = agent.train_step({obs, action.raw, r_train, step.observation});

      rec.r_true = step.reward;
      rec.r_train = r_train;
      rec.fired = decision.fired;
      rec.eligible = decision.eligible;
      rec.signal = decision.signal;
      rec.threshold = decision.threshold.value_or(kNaN);
      rec.power = step.power;
      rec.cap = step.cap;
      rec.rate = step.reward;
      rec.critic_loss1 = stats.critic_loss1;
      rec.critic_loss2 = stats.critic_loss2;
      rec.actor_loss = stats.actor_loss;
      log.steps.push_back(rec);
      if (observer) observer(t, agent);
      obs = std::move(step.observation);
    }
  } catch (const DivergenceError& e) {
    log.summary.failed = true;
    log.summary.failure = e.what();
  }

  RunSummary& s = log.summary;
  s.clamped_actions = environment.clamp_count();
  for (const StepRecord& r : log.steps) s.total_fires += r.fired ? 1 : 0;
  s.fire_rate = static_cast<double>(s.total_fires) /
                static_cast<double>(cfg.total_steps - cfg.attack.warmup);
  if (!s.failed) {
    s.final_mean_rate = final_mean_rate(log, cfg.ma_window);
    double sum = 0.0;
    std::size_t n = 0;
    for (const StepRecord& r : log.steps) {
      if (!std::isnan(r.eval_rate)) {
        sum += r.eval_rate;
        ++n;
      }
    }
    s.eval_mean_rate = n > 0 ? sum / static_cast<double>(n) : kNaN;
  } else {
    s.final_mean_rate = kNaN;
    s.eval_mean_rate = kNaN;
  }
  return log;
}

std::vector<double> random_policy_rates(const RunConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const StreamSeeds streams = derive_streams(seed);
  env::EnvConfig env_cfg = cfg.env;
  env_cfg.seed = streams.env;
  env::CrnRisEnv environment(env_cfg);
  std::mt19937_64 rng(streams.agent_sampling ^ 0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  std::vector<double> raw(env::action_size(cfg.env.ris_elements));
  std::vector<double> rates;
  rates.reserve(static_cast<std::size_t>(cfg.total_steps));
  for (std::int64_t t = 0; t < cfg.total_steps; ++t) {
    for (double& a : raw) a = uniform(rng);
    rates.push_back(environment.step(raw).reward);
  }
  return rates;
}

}  // namespace rispoison::harness
