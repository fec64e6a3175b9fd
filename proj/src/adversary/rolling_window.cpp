#include "rispoison/adversary/rolling_window.hpp"

#include <algorithm>
#include <cmath>

#include "rispoison/errors.hpp"

namespace rispoison::adversary {

std::size_t nearest_rank(double q, std::size_t n) {
  const double x = q * static_cast<double>(n);
  const auto rank = static_cast<std::size_t>(std::ceil(x - 1e-12 * std::max(1.0, x)));
  return std::clamp<std::size_t>(rank, 1, n);
}

namespace {

double select_rank(std::vector<double>& scratch, double q) {
  const std::size_t k = nearest_rank(q, scratch.size()) - 1;
  std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k), scratch.end());
  return scratch[k];
}

void check_q(double q) {
  if (!(q > 0.0 && q <= 1.0)) throw ConfigError("quantile level must lie in (0, 1]");
}

}  // namespace

double nearest_rank_quantile(std::span<const double> values, double q) {
  check_q(q);
  if (values.empty()) throw ConfigError("nearest_rank_quantile: empty input");
  std::vector<double> scratch(values.begin(), values.end());
  return select_rank(scratch, q);
}

RollingWindow::RollingWindow(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("RollingWindow: capacity must be positive");
}

void RollingWindow::push(double value) {
  if (values_.size() == capacity_) values_.pop_front();
  values_.push_back(value);
}

std::optional<double> RollingWindow::quantile(double q) const {
  check_q(q);
  if (!full()) return std::nullopt;
  scratch_.assign(values_.begin(), values_.end());
  return select_rank(scratch_, q);
}

}  // namespace rispoison::adversary
