#pragma once

#include <cstdint>
#include <vector>

#include "rispoison/nn/array2.hpp"

namespace rispoison::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

/// Adaptive moment estimation with bias correction. Minimizes: parameters
/// move against the supplied gradient.
class Adam {
 public:
  Adam() = default;
  /// Moment buffers are shaped after `params`.
  Adam(AdamConfig config, const std::vector<const Array2*>& params);

  /// Throws ConfigError on count/shape mismatch and DivergenceError if any
  /// gradient entry is non-finite (parameters are left untouched).
  void step(const std::vector<Array2*>& params, const std::vector<Array2>& grads);

  std::int64_t step_count() const { return steps_; }
  const AdamConfig& config() const { return config_; }

  friend bool operator==(const Adam&, const Adam&) = default;

 private:
  AdamConfig config_;
  std::vector<Array2> first_;
  std::vector<Array2> second_;
  std::int64_t steps_ = 0;
};

}  // namespace rispoison::nn
