#include "rispoison/sac/sac_agent.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "rispoison/errors.hpp"
#include "rispoison/kernels.hpp"
#include "rispoison/sac/squashed_gaussian.hpp"

namespace rispoison::sac {

using nn::Array2;
using nn::Tape;
using nn::Var;

void SacConfig::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("sac.gamma must lie in [0, 1]");
  if (!(learning_rate > 0.0)) throw ConfigError("sac.lr must be > 0");
  if (!(entropy_coef >= 0.0)) throw ConfigError("sac.entropy must be >= 0");
  if (batch_size == 0) throw ConfigError("sac.batch must be >= 1");
  if (batch_size > buffer_capacity) throw ConfigError("sac.batch must not exceed sac.buffer");
  if (!(polyak >= 0.0 && polyak <= 1.0)) throw ConfigError("sac.polyak must lie in [0, 1]");
  if (!(target_clip > 0.0)) throw ConfigError("sac.target_clip must be > 0");
  if (!(average_reward_rate > 0.0 && average_reward_rate <= 1.0)) {
    throw ConfigError("sac.average_reward_rate must lie in (0, 1]");
  }
  if (hidden_width == 0 || hidden_layers == 0) throw ConfigError("sac.hidden must be >= 1");
  if (auto_entropy && entropy_coef <= 0.0) {
    throw ConfigError("sac.entropy must be > 0 when sac.auto_entropy is on");
  }
}

Array2 critic_target(const Array2& reward, const Array2& next_q1, const Array2& next_q2,
                     const Array2& next_log_prob, double gamma, double entropy_coef,
                     double target_clip, double reward_rate) {
  Array2 u(reward.rows(), 1);
  for (std::size_t i = 0; i < reward.rows(); ++i) {
    const double soft_value = std::min(next_q1[i], next_q2[i]) - entropy_coef * next_log_prob[i];
    u[i] = std::clamp(reward[i] - reward_rate + gamma * soft_value, -target_clip, target_clip);
  }
  return u;
}

namespace {

std::vector<std::size_t> layer_widths(std::size_t in, std::size_t hidden, std::size_t layers,
                                      std::size_t out) {
  std::vector<std::size_t> w{in};
  for (std::size_t i = 0; i < layers; ++i) w.push_back(hidden);
  w.push_back(out);
  return w;
}

void check_finite(const Array2& a, const char* what) {
  if (!a.all_finite()) throw DivergenceError(std::string("non-finite ") + what);
}

}  // namespace

SacAgent::SacAgent(SacConfig config, std::size_t obs_dim, std::size_t act_dim,
                   std::uint64_t init_seed, std::uint64_t sample_seed)
    : config_(config), obs_dim_(obs_dim), act_dim_(act_dim), sample_rng_(sample_seed) {
  config_.validate();
  if (obs_dim == 0 || act_dim == 0) throw ConfigError("SacAgent: dimensions must be positive");
  if (config_.target_entropy == 0.0) config_.target_entropy = -static_cast<double>(act_dim);

  std::mt19937_64 init_rng(init_seed);
  actor_ = nn::Mlp(layer_widths(obs_dim, config_.hidden_width, config_.hidden_layers, 2 * act_dim),
                   init_rng);
  // Log-std head starts near zero so the initial policy has std ~ 1.
  {
    const std::size_t last = actor_.layer_count() - 1;
    Array2& w = actor_.weight(last);
    Array2& b = actor_.bias(last);
    for (std::size_t r = 0; r < w.rows(); ++r) {
      for (std::size_t c = act_dim; c < 2 * act_dim; ++c) w(r, c) *= 1e-3;
    }
    for (std::size_t c = act_dim; c < 2 * act_dim; ++c) b[c] = 0.0;
  }
  const auto critic_widths =
      layer_widths(obs_dim + act_dim, config_.hidden_width, config_.hidden_layers, 1);
  critic1_ = nn::Mlp(critic_widths, init_rng);
  critic2_ = nn::Mlp(critic_widths, init_rng);
  target1_ = critic1_;
  target2_ = critic2_;

  const nn::AdamConfig opt{config_.learning_rate, 0.9, 0.999, 1e-8};
  actor_opt_ = nn::Adam(opt, std::as_const(actor_).parameters());
  critic1_opt_ = nn::Adam(opt, std::as_const(critic1_).parameters());
  critic2_opt_ = nn::Adam(opt, std::as_const(critic2_).parameters());
  log_alpha_ = config_.entropy_coef > 0.0 ? std::log(config_.entropy_coef) : 0.0;
  replay_ = ReplayBuffer(config_.buffer_capacity, obs_dim, act_dim);
}

double SacAgent::entropy_coef() const {
  return config_.auto_entropy ? std::exp(log_alpha_) : config_.entropy_coef;
}

std::pair<Array2, Array2> SacAgent::policy_head(const Array2& obs) const {
  const Array2 out = actor_.predict(obs);
  check_finite(out, "actor output");
  Array2 mean(obs.rows(), act_dim_);
  Array2 log_std(obs.rows(), act_dim_);
  for (std::size_t r = 0; r < obs.rows(); ++r) {
    for (std::size_t c = 0; c < act_dim_; ++c) {
      mean(r, c) = out(r, c);
      log_std(r, c) = std::clamp(out(r, act_dim_ + c), kLogStdMin, kLogStdMax);
    }
  }
  return {std::move(mean), std::move(log_std)};
}

ActionSample SacAgent::select_action(std::span<const double> obs, ActionMode mode) {
  if (obs.size() != obs_dim_) throw ConfigError("select_action: observation size mismatch");
  ActionSample out;
  out.raw.resize(act_dim_);
  if (mode == ActionMode::stochastic && transitions_ < config_.warm_start) {
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    for (double& a : out.raw) a = uniform(sample_rng_);
    out.log_prob = -static_cast<double>(act_dim_) * std::numbers::ln2;
    out.entropy = -out.log_prob;
    return out;
  }
  const auto [mean, log_std] = policy_head(Array2::row(obs));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t c = 0; c < act_dim_; ++c) {
    const double u = mode == ActionMode::deterministic
                         ? mean[c]
                         : mean[c] + std::exp(log_std[c]) * normal(sample_rng_);
    out.raw[c] = std::tanh(u);
    out.log_prob += squashed_log_prob(u, mean[c], log_std[c]);
  }
  out.entropy = -out.log_prob;
  return out;
}

Introspection SacAgent::introspect(std::span<const double> obs,
                                   std::span<const double> action) const {
  if (obs.size() != obs_dim_ || action.size() != act_dim_) {
    throw ConfigError("introspect: dimension mismatch");
  }
  const Array2 s = Array2::row(obs);
  const Array2 x = critic_input(s, Array2::row(action));
  Introspection out;
  out.q1 = critic1_.predict(x)[0];
  out.q2 = critic2_.predict(x)[0];
  const auto [mean, log_std] = policy_head(s);
  double log_prob = 0.0;
  for (std::size_t c = 0; c < act_dim_; ++c) {
    log_prob += squashed_log_prob_of_action(action[c], mean[c], log_std[c]);
  }
  out.entropy = -log_prob;
  return out;
}

Array2 SacAgent::critic_input(const Array2& obs, const Array2& action) const {
  Array2 x(obs.rows(), obs_dim_ + act_dim_);
  for (std::size_t r = 0; r < obs.rows(); ++r) {
    std::copy_n(obs.row_span(r).begin(), obs_dim_, x.data().begin() + r * x.cols());
    std::copy_n(action.row_span(r).begin(), act_dim_, x.data().begin() + r * x.cols() + obs_dim_);
  }
  return x;
}

Array2 SacAgent::draw_noise(std::size_t rows) {
  Array2 noise(rows, act_dim_);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : noise.data()) v = normal(sample_rng_);
  return noise;
}

SacAgent::Sampled SacAgent::squash(const Array2& obs, const Array2& noise) const {
  const auto [mean, log_std] = policy_head(obs);
  if (!noise.same_shape(mean)) throw ConfigError("noise must be batch x act_dim");
  Sampled s{Array2(obs.rows(), act_dim_), Array2(obs.rows(), 1)};
  for (std::size_t r = 0; r < obs.rows(); ++r) {
    double lp = 0.0;
    for (std::size_t c = 0; c < act_dim_; ++c) {
      const double u = mean(r, c) + std::exp(log_std(r, c)) * noise(r, c);
      s.action(r, c) = std::tanh(u);
      lp += squashed_log_prob(u, mean(r, c), log_std(r, c));
    }
    s.log_prob[r] = lp;
  }
  return s;
}

SacAgent::Sampled SacAgent::sample_batch_actions(const Array2& obs) {
  return squash(obs, draw_noise(obs.rows()));
}

Array2 SacAgent::compute_targets(const Batch& batch) {
  return compute_targets(batch, draw_noise(batch.next_obs.rows()));
}

Array2 SacAgent::compute_targets(const Batch& batch, const Array2& noise) {
  const Sampled next = squash(batch.next_obs, noise);
  const Array2 x = critic_input(batch.next_obs, next.action);
  if (config_.average_reward) {
    // Soft reward per transition: r - e_s * log pi(a'|s').
    double soft = 0.0;
    for (std::size_t i = 0; i < batch.reward.rows(); ++i) {
      soft += batch.reward[i] - entropy_coef() * next.log_prob[i];
    }
    soft /= static_cast<double>(batch.reward.rows());
    reward_rate_ = reward_rate_init_
                       ? reward_rate_ + config_.average_reward_rate * (soft - reward_rate_)
                       : soft;
    reward_rate_init_ = true;
  }
  return critic_target(batch.reward, target1_.predict(x), target2_.predict(x), next.log_prob,
                       config_.gamma, entropy_coef(), config_.target_clip, reward_rate_);
}

std::pair<double, double> SacAgent::update_critics(const Batch& batch) {
  const Array2 targets = compute_targets(batch);
  const Array2 x = critic_input(batch.obs, batch.action);
  double losses[2] = {0.0, 0.0};
  nn::Mlp* critics[2] = {&critic1_, &critic2_};
  nn::Adam* opts[2] = {&critic1_opt_, &critic2_opt_};
  for (int i = 0; i < 2; ++i) {
    Tape tape;
    std::vector<Var> bound;
    const Var pred = critics[i]->forward(tape, tape.constant(x), &bound);
    const Var loss = tape.mean(tape.square(tape.sub(pred, tape.constant(targets))));
    losses[i] = tape.value(loss)[0];
    if (!std::isfinite(losses[i])) throw DivergenceError("non-finite critic loss");
    tape.backward(loss);
    opts[i]->step(critics[i]->parameters(), nn::Mlp::gradients(tape, bound));
  }
  return {losses[0], losses[1]};
}

SacAgent::ActorObjective SacAgent::actor_objective(const Batch& batch, const Array2& noise) const {
  const std::size_t m = batch.obs.rows();
  if (noise.rows() != m || noise.cols() != act_dim_) throw ConfigError("noise must be batch x act_dim");
  // Per-sample constant part of log N(u; mean, std) with u = mean + std * noise.
  Array2 gaussian_const(m, act_dim_);
  for (std::size_t i = 0; i < noise.size(); ++i) {
    gaussian_const[i] = -0.5 * noise[i] * noise[i] - kHalfLogTwoPi;
  }

  Tape tape;
  std::vector<Var> bound;
  const Var obs = tape.constant(batch.obs);
  const Var head = actor_.forward(tape, obs, &bound);
  const Var mean = tape.slice_cols(head, 0, act_dim_);
  const Var log_std =
      tape.clamp(tape.slice_cols(head, act_dim_, 2 * act_dim_), kLogStdMin, kLogStdMax);
  const Var pre = tape.add(mean, tape.mul(tape.exp(log_std), tape.constant(noise)));
  const Var action = tape.tanh(pre);
  // log(1 - tanh(u)^2) = 2 (log 2 - u - softplus(-2u))
  const Var log_jac = tape.scale(
      tape.add_scalar(tape.scale(tape.add(pre, tape.softplus(tape.scale(pre, -2.0))), -1.0),
                      std::numbers::ln2),
      2.0);
  const Var log_prob =
      tape.sum_cols(tape.sub(tape.sub(tape.constant(gaussian_const), log_std), log_jac));

  const Var x = tape.concat_cols(obs, action);
  const Var q = tape.min(critic1_.forward(tape, x), critic2_.forward(tape, x));
  const Var loss = tape.mean(tape.sub(tape.scale(log_prob, entropy_coef()), q));
  ActorObjective out;
  out.loss = tape.value(loss)[0];
  if (!std::isfinite(out.loss)) throw DivergenceError("non-finite actor loss");
  tape.backward(loss);
  out.gradients = nn::Mlp::gradients(tape, bound);
  return out;
}

double SacAgent::update_actor(const Batch& batch) {
  ActorObjective obj = actor_objective(batch, draw_noise(batch.obs.rows()));
  actor_opt_.step(actor_.parameters(), obj.gradients);
  return obj.loss;
}

void SacAgent::update_entropy(const Batch& batch) {
  if (!config_.auto_entropy) return;
  const Sampled s = sample_batch_actions(batch.obs);
  double mean_term = 0.0;
  for (std::size_t r = 0; r < s.log_prob.rows(); ++r) mean_term += s.log_prob[r] + config_.target_entropy;
  mean_term /= static_cast<double>(s.log_prob.rows());
  // loss = -log_alpha * mean(log_prob + target)  =>  d/dlog_alpha = -mean_term
  const double g = -mean_term;
  ++alpha_steps_;
  alpha_m_ = 0.9 * alpha_m_ + 0.1 * g;
  alpha_v_ = 0.999 * alpha_v_ + 0.001 * g * g;
  const double t = static_cast<double>(alpha_steps_);
  const double mhat = alpha_m_ / (1.0 - std::pow(0.9, t));
  const double vhat = alpha_v_ / (1.0 - std::pow(0.999, t));
  log_alpha_ -= config_.learning_rate * mhat / (std::sqrt(vhat) + 1e-8);
}

void SacAgent::polyak_update() { polyak_update(config_.polyak); }

void SacAgent::polyak_update(double rate) {
  const auto& k = kernels::active();
  const std::pair<nn::Mlp*, nn::Mlp*> pairs[2] = {{&target1_, &critic1_}, {&target2_, &critic2_}};
  for (auto [target, online] : pairs) {
    auto dst = target->parameters();
    auto src = std::as_const(*online).parameters();
    for (std::size_t i = 0; i < dst.size(); ++i) {
      if (rate == 1.0) {
        *dst[i] = *src[i];
      } else {
        k.lerp(dst[i]->size(), dst[i]->data().data(), src[i]->data().data(), rate);
      }
    }
  }
}

double SacAgent::normalize(double reward) {
  if (!config_.normalize_rewards) return reward;
  ++reward_count_;
  const double delta = reward - reward_mean_;
  reward_mean_ += delta / static_cast<double>(reward_count_);
  reward_m2_ += delta * (reward - reward_mean_);
  const double var = reward_count_ > 1 ? reward_m2_ / static_cast<double>(reward_count_ - 1) : 0.0;
  const double sd = std::sqrt(var);
  return sd > 1e-8 ? (reward - reward_mean_) / sd : reward - reward_mean_;
}

UpdateStats SacAgent::train_step(const Transition& transition) {
  replay_.push(transition.obs, transition.action, normalize(transition.reward),
               transition.next_obs);
  const std::size_t seen_before = transitions_++;
  UpdateStats stats;
  stats.entropy_coef = entropy_coef();
  if (seen_before < std::max(config_.warm_start, config_.batch_size)) return stats;
  for (std::size_t round = 0; round < config_.updates_per_step; ++round) {
    const Batch batch = replay_.sample(sample_rng_, config_.batch_size);
    std::tie(stats.critic_loss1, stats.critic_loss2) = update_critics(batch);
    stats.actor_loss = update_actor(batch);
    update_entropy(batch);
    polyak_update();
    ++update_rounds_;
  }
  if (!actor_.all_finite() || !critic1_.all_finite() || !critic2_.all_finite()) {
    throw DivergenceError("non-finite network parameters after update");
  }
  stats.updated = true;
  stats.entropy_coef = entropy_coef();
  return stats;
}

bool SacAgent::parameters_finite() const {
  return actor_.all_finite() && critic1_.all_finite() && critic2_.all_finite() &&
         target1_.all_finite() && target2_.all_finite();
}

}  // namespace rispoison::sac
