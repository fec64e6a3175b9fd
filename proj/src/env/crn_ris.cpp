#include "rispoison/env/crn_ris.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "rispoison/errors.hpp"

namespace rispoison::env {

double db_to_linear(double x_db) { return std::pow(10.0, x_db / 10.0); }

ChannelDraw sample_channels(std::mt19937_64& rng, std::size_t ris_elements,
                            double interference_limit_db) {
  if (ris_elements == 0) throw ConfigError("sample_channels: R must be >= 1");
  std::normal_distribution<double> half_var(0.0, std::sqrt(0.5));
  auto draw = [&] {
    const double re = half_var(rng);
    const double im = half_var(rng);
    return Complex(re, im);
  };
  ChannelDraw out;
  out.h1.resize(ris_elements);
  out.h2.resize(ris_elements);
  for (auto& h : out.h1) h = draw();
  for (auto& h : out.h2) h = draw();
  out.hp = draw();
  out.gp = std::norm(out.hp);
  out.interference_limit_db = interference_limit_db;
  return out;
}

double power_cap(double max_power_lin, double interference_lin, double gp) {
  if (gp <= 0.0) return max_power_lin;
  return std::min(max_power_lin, interference_lin / gp);
}

double effective_gain(std::span<const Complex> h1, const PhaseConfig& phases,
                      std::span<const Complex> h2) {
  if (h1.size() != h2.size() || h1.size() != phases.rho.size()) {
    throw ConfigError("effective_gain: h1, phases and h2 must all have length R");
  }
  Complex sum(0.0, 0.0);
  for (std::size_t r = 0; r < h1.size(); ++r) {
    sum += h1[r] * std::polar(1.0, phases.rho[r]) * h2[r];
  }
  return std::norm(sum);
}

double snr(double power, double gain, double noise) { return power * gain / noise; }

double rate(double snr_linear) { return std::log2(1.0 + snr_linear); }

namespace {
double wrap_angle(double a) {
  double w = std::fmod(a, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}
}  // namespace

PhaseConfig cophase(std::span<const Complex> h1, std::span<const Complex> h2) {
  if (h1.size() != h2.size()) throw ConfigError("cophase: length mismatch");
  PhaseConfig out;
  out.rho.resize(h1.size());
  for (std::size_t r = 0; r < h1.size(); ++r) out.rho[r] = wrap_angle(-std::arg(h1[r] * h2[r]));
  return out;
}

DecodedAction decode_action(std::span<const double> raw, double cap) {
  if (raw.empty()) throw ConfigError("decode_action: empty action");
  DecodedAction out;
  auto clamped = [&](double v) {
    if (std::isnan(v)) throw DivergenceError("decode_action: NaN action component");
    if (v < -1.0 || v > 1.0) {
      ++out.clamped;
      return std::clamp(v, -1.0, 1.0);
    }
    return v;
  };
  const double u = clamped(raw[0]);
  out.power = cap * ((u + 1.0) / 2.0);
  out.phases.rho.resize(raw.size() - 1);
  for (std::size_t r = 1; r < raw.size(); ++r) {
    const double rho = std::numbers::pi * (clamped(raw[r]) + 1.0);
    out.phases.rho[r - 1] = rho >= kTwoPi ? rho - kTwoPi : rho;
  }
  return out;
}

void EnvConfig::validate() const {
  if (ris_elements < 1) throw ConfigError("env.R must be >= 1");
  if (!(noise > 0.0)) throw ConfigError("env.N0 must be > 0");
  if (!std::isfinite(max_power_db)) throw ConfigError("env.P_m_db must be finite");
  if (!std::isfinite(interference_db)) throw ConfigError("env.I_db must be finite");
}

CrnRisEnv::CrnRisEnv(EnvConfig config)
    : config_(config),
      max_power_lin_(db_to_linear(config.max_power_db)),
      interference_lin_(db_to_linear(config.interference_db)),
      prev_rho_(config.ris_elements, 0.0) {
  config_.validate();
  reset(config_.seed);
}

std::vector<double> CrnRisEnv::reset(std::uint64_t seed) {
  rng_.seed(seed);
  channels_ = sample_channels(rng_, config_.ris_elements, config_.interference_db);
  prev_power_ = 0.0;
  std::fill(prev_rho_.begin(), prev_rho_.end(), 0.0);
  clamp_count_ = 0;
  return observation();
}

void CrnRisEnv::set_channels(ChannelDraw draw) {
  if (draw.h1.size() != config_.ris_elements || draw.h2.size() != config_.ris_elements) {
    throw ConfigError("set_channels: channel length must equal R");
  }
  channels_ = std::move(draw);
}

double CrnRisEnv::current_cap() const {
  return power_cap(max_power_lin_, interference_lin_, channels_.gp);
}

std::vector<double> CrnRisEnv::observation() const {
  std::vector<double> obs;
  obs.reserve(observation_size(config_.ris_elements));
  obs.push_back(channels_.interference_limit_db);
  for (const Complex& h : channels_.h1) {
    obs.push_back(h.real());
    obs.push_back(h.imag());
  }
  for (const Complex& h : channels_.h2) {
    obs.push_back(h.real());
    obs.push_back(h.imag());
  }
  obs.push_back(channels_.hp.real());
  obs.push_back(channels_.hp.imag());
  obs.push_back(prev_power_);
  obs.insert(obs.end(), prev_rho_.begin(), prev_rho_.end());
  return obs;
}

StepResult CrnRisEnv::step(std::span<const double> raw_action) {
  if (raw_action.size() != action_size(config_.ris_elements)) {
    throw ConfigError("CrnRisEnv::step: action must have 1 + R = " +
                      std::to_string(action_size(config_.ris_elements)) + " entries");
  }
  StepResult out;
  out.cap = current_cap();
  DecodedAction decoded = decode_action(raw_action, out.cap);
  clamp_count_ += decoded.clamped;
  out.power = decoded.power;
  out.gain = effective_gain(channels_.h1, decoded.phases, channels_.h2);
  out.reward = rate(snr(out.power, out.gain, config_.noise));

  prev_power_ = decoded.power;
  prev_rho_ = std::move(decoded.phases.rho);
  channels_ = sample_channels(rng_, config_.ris_elements, config_.interference_db);
  out.observation = observation();
  return out;
}

}  // namespace rispoison::env
