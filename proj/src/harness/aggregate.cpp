#include "rispoison/harness/aggregate.hpp"

#include <cmath>

#include "rispoison/errors.hpp"
#include "rispoison/harness/run.hpp"

namespace rispoison::harness {

std::vector<double> trailing_moving_average(std::span<const double> values, std::size_t window) {
  if (window == 0) throw ConfigError("moving average window must be >= 1");
  std::vector<double> out(values.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum += values[i];
    if (i >= window) sum -= values[i - window];
    const std::size_t n = i + 1 < window ? i + 1 : window;
    out[i] = sum / static_cast<double>(n);
  }
  return out;
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  out.n = values.size();
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

AggregateCurve aggregate(const std::vector<RunLog>& logs, std::size_t window) {
  std::vector<std::vector<double>> smoothed;
  std::size_t length = 0;
  for (const RunLog& log : logs) {
    if (log.summary.failed) continue;
    if (!smoothed.empty() && log.steps.size() != length) {
      throw ConfigError("aggregate: runs have different lengths");
    }
    length = log.steps.size();
    std::vector<double> clean;
    clean.reserve(length);
    for (const StepRecord& s : log.steps) clean.push_back(s.r_true);
    smoothed.push_back(trailing_moving_average(clean, window));
  }
  AggregateCurve curve;
  curve.runs = smoothed.size();
  if (smoothed.empty()) return curve;
  std::vector<double> column(smoothed.size());
  for (std::size_t i = 0; i < length; ++i) {
    for (std::size_t k = 0; k < smoothed.size(); ++k) column[k] = smoothed[k][i];
    const MeanStd ms = mean_std(column);
    curve.t.push_back(static_cast<std::int64_t>(i));
    curve.mean.push_back(ms.mean);
    curve.std.push_back(ms.std);
  }
  return curve;
}

}  // namespace rispoison::harness
