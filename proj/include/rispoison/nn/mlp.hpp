#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "rispoison/nn/array2.hpp"
#include "rispoison/nn/tape.hpp"

namespace rispoison::nn {

/// Fully connected network: ReLU on hidden layers, identity output.
///
/// Layer l computes h_{l+1} = h_l * W_l + b_l with W_l of shape
/// widths[l] x widths[l+1] and b_l of shape 1 x widths[l+1].
class Mlp {
 public:
  Mlp() = default;
  /// Weights and biases of each layer drawn U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  Mlp(std::vector<std::size_t> widths, std::mt19937_64& rng);

  std::size_t input_width() const { return widths_.front(); }
  std::size_t output_width() const { return widths_.back(); }
  std::size_t layer_count() const { return weights_.size(); }
  const std::vector<std::size_t>& widths() const { return widths_; }

  Array2& weight(std::size_t layer) { return weights_.at(layer); }
  Array2& bias(std::size_t layer) { return biases_.at(layer); }
  const Array2& weight(std::size_t layer) const { return weights_.at(layer); }
  const Array2& bias(std::size_t layer) const { return biases_.at(layer); }

  /// Records the forward pass on `tape`. If `bound` is non-null the
  /// parameters enter as gradient-receiving leaves and their Vars are
  /// appended to it (W_0, b_0, W_1, b_1, ...); otherwise they enter as
  /// references that take no gradient.
  Var forward(Tape& tape, Var input, std::vector<Var>* bound = nullptr) const;

  /// Tape-free evaluation; same arithmetic as forward().
  Array2 predict(const Array2& input) const;

  /// Parameters in the same order forward() binds them.
  std::vector<Array2*> parameters();
  std::vector<const Array2*> parameters() const;
  std::size_t parameter_count() const;

  static std::vector<Array2> gradients(const Tape& tape, const std::vector<Var>& bound);

  bool all_finite() const;

  friend bool operator==(const Mlp&, const Mlp&) = default;

 private:
  void check_input(const Array2& input) const;

  std::vector<std::size_t> widths_;
  std::vector<Array2> weights_;
  std::vector<Array2> biases_;
};

}  // namespace rispoison::nn
