#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace rispoison::harness {

struct RunLog;

/// out[t] = mean(x[max(0, t - window + 1) .. t]).
std::vector<double> trailing_moving_average(std::span<const double> values, std::size_t window);

/// Cross-seed mean and sample standard deviation of the per-seed moving
/// average of the clean reward.
struct AggregateCurve {
  std::vector<std::int64_t> t;
  std::vector<double> mean;
  std::vector<double> std;
  std::size_t runs = 0;
};

/// Failed runs are skipped. Throws ConfigError if the remaining logs differ in length.
AggregateCurve aggregate(const std::vector<RunLog>& logs, std::size_t window);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample (n - 1) standard deviation; 0 for n < 2
  std::size_t n = 0;
};
MeanStd mean_std(std::span<const double> values);

}  // namespace rispoison::harness
