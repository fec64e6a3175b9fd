#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <vector>

namespace rispoison::adversary {

/// 1-based nearest rank ceil(q * n), clamped to [1, n]. A relative slack of
/// 1e-12 keeps products like 0.7 * 10 from rounding up to the next rank.
std::size_t nearest_rank(double q, std::size_t n);

/// Empirical q-quantile by nearest rank: the ceil(q*n)-th smallest value.
/// Throws ConfigError on empty input or q outside (0, 1].
double nearest_rank_quantile(std::span<const double> values, double q);

/// FIFO of the last `capacity` signal values.
class RollingWindow {
 public:
  explicit RollingWindow(std::size_t capacity);

  void push(double value);
  std::size_t size() const { return values_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool full() const { return values_.size() == capacity_; }

  /// Defined only once the window is full; nullopt otherwise.
  std::optional<double> quantile(double q) const;

  std::vector<double> values() const { return {values_.begin(), values_.end()}; }

 private:
  std::size_t capacity_;
  std::deque<double> values_;
  mutable std::vector<double> scratch_;
};

}  // namespace rispoison::adversary
