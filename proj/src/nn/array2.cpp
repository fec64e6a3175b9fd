#include "rispoison/nn/array2.hpp"

#include <algorithm>
#include <cmath>

#include "rispoison/errors.hpp"

namespace rispoison::nn {

Array2::Array2(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ConfigError("Array2: data length does not match rows x cols");
  }
}

Array2 Array2::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ConfigError("Array2::from_rows: ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Array2(r, c, std::move(data));
}

Array2 Array2::row(std::span<const double> values) {
  return Array2(1, values.size(), std::vector<double>(values.begin(), values.end()));
}

bool Array2::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void Array2::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

}  // namespace rispoison::nn
