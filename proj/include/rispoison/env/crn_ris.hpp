#pragma once

// RIS-assisted underlay cognitive-radio link.
//
// The SU transmitter reaches its receiver only through an R-element passive
// RIS (direct link blocked). Transmit power is capped so that interference at
// the primary receiver stays below I:  P_s <= min(P_m, I / g_p).

#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace rispoison::env {

using Complex = std::complex<double>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

double db_to_linear(double x_db);

/// One realization of every fading coefficient.
struct ChannelDraw {
  std::vector<Complex> h1;  // SU-Tx -> RIS, per element
  std::vector<Complex> h2;  // RIS -> SU-Rx, per element
  Complex hp;               // SU-Tx -> PU-Rx
  double gp = 0.0;          // |hp|^2
  double interference_limit_db = 0.0;
};

/// Circularly-symmetric unit-variance complex Gaussian entries (Rayleigh
/// envelope): real and imaginary parts i.i.d. N(0, 1/2).
ChannelDraw sample_channels(std::mt19937_64& rng, std::size_t ris_elements,
                            double interference_limit_db);

/// RIS phase angles, each in [0, 2*pi). Reflection coefficients are e^{j*rho}.
struct PhaseConfig {
  std::vector<double> rho;
};

/// min(P_m, I / g_p); for g_p == 0 the interference constraint is vacuous.
double power_cap(double max_power_lin, double interference_lin, double gp);

/// |sum_r h1_r * e^{j rho_r} * h2_r|^2. Throws ConfigError on length mismatch.
double effective_gain(std::span<const Complex> h1, const PhaseConfig& phases,
                      std::span<const Complex> h2);

double snr(double power, double gain, double noise);
/// log2(1 + snr), bits/s/Hz.
double rate(double snr_linear);

/// Phases that align every reflected path: rho_r = -arg(h1_r * h2_r).
PhaseConfig cophase(std::span<const Complex> h1, std::span<const Complex> h2);

struct DecodedAction {
  double power = 0.0;
  PhaseConfig phases;
  std::size_t clamped = 0;  // raw entries that were outside [-1, 1]
};

/// raw[0] in [-1,1] -> P_s = cap * (raw[0] + 1) / 2;  raw[r] -> rho = pi * (raw[r] + 1),
/// folded into [0, 2*pi). Out-of-range entries are clamped and counted.
DecodedAction decode_action(std::span<const double> raw, double cap);

struct EnvConfig {
  std::size_t ris_elements = 6;
  double max_power_db = 1.0;
  double interference_db = 10.0;
  double noise = 1e-2;
  std::uint64_t seed = 0;

  void validate() const;
};

constexpr std::size_t observation_size(std::size_t ris_elements) { return 4 + 5 * ris_elements; }
constexpr std::size_t action_size(std::size_t ris_elements) { return 1 + ris_elements; }

struct StepResult {
  std::vector<double> observation;  // next state
  double reward = 0.0;              // SU rate under the executed action
  double power = 0.0;               // executed P_s (linear)
  double cap = 0.0;                 // cap in force for this step
  double gain = 0.0;
};

/// Continuing (never terminal) environment. Channels are redrawn i.i.d. after
/// every step.
class CrnRisEnv {
 public:
  explicit CrnRisEnv(EnvConfig config);

  /// Reseeds the channel stream, draws fresh channels and clears the
  /// previous-action fields (P_s = 0, rho = 0).
  std::vector<double> reset(std::uint64_t seed);
  StepResult step(std::span<const double> raw_action);

  /// Layout: [I_dB, Re/Im h1 (2R), Re/Im h2 (2R), Re/Im hp (2), prev P_s, prev rho (R)].
  std::vector<double> observation() const;

  const EnvConfig& config() const { return config_; }
  const ChannelDraw& channels() const { return channels_; }
  /// Overrides the current draw; used to pin channels in tests.
  void set_channels(ChannelDraw draw);
  double current_cap() const;
  std::size_t clamp_count() const { return clamp_count_; }

 private:
  EnvConfig config_;
  double max_power_lin_;
  double interference_lin_;
  std::mt19937_64 rng_;
  ChannelDraw channels_;
  double prev_power_ = 0.0;
  std::vector<double> prev_rho_;
  std::size_t clamp_count_ = 0;
};

}  // namespace rispoison::env
