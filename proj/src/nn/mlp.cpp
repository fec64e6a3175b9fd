#include "rispoison/nn/mlp.hpp"

#include <cmath>
#include <string>

#include "rispoison/errors.hpp"
#include "rispoison/kernels.hpp"

namespace rispoison::nn {

Mlp::Mlp(std::vector<std::size_t> widths, std::mt19937_64& rng) : widths_(std::move(widths)) {
  if (widths_.size() < 2) throw ConfigError("Mlp: need at least input and output widths");
  for (std::size_t w : widths_) {
    if (w == 0) throw ConfigError("Mlp: layer width must be positive");
  }
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(widths_[l]));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Array2 w(widths_[l], widths_[l + 1]);
    Array2 b(1, widths_[l + 1]);
    for (double& v : w.data()) v = dist(rng);
    for (double& v : b.data()) v = dist(rng);
    weights_.push_back(std::move(w));
    biases_.push_back(std::move(b));
  }
}

void Mlp::check_input(const Array2& input) const {
  if (widths_.empty()) throw ConfigError("Mlp: network is empty");
  if (input.cols() != input_width()) {
    throw ConfigError("Mlp: input has " + std::to_string(input.cols()) + " columns, expected " +
                      std::to_string(input_width()));
  }
}

Var Mlp::forward(Tape& tape, Var input, std::vector<Var>* bound) const {
  check_input(tape.value(input));
  Var h = input;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Var w = bound ? tape.parameter(weights_[l]) : tape.constant(weights_[l]);
    Var b = bound ? tape.parameter(biases_[l]) : tape.constant(biases_[l]);
    if (bound) {
      bound->push_back(w);
      bound->push_back(b);
    }
    h = tape.add_bias(tape.matmul(h, w), b);
    if (l + 1 < weights_.size()) h = tape.relu(h);
  }
  return h;
}

Array2 Mlp::predict(const Array2& input) const {
  check_input(input);
  const auto& k = kernels::active();
  Array2 h = input;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    const Array2& w = weights_[l];
    Array2 next(h.rows(), w.cols());
    k.gemm_nn(h.rows(), w.cols(), w.rows(), h.data().data(), w.data().data(), next.data().data(),
              false);
    const bool hidden = l + 1 < weights_.size();
    for (std::size_t r = 0; r < next.rows(); ++r) {
      for (std::size_t c = 0; c < next.cols(); ++c) {
        double v = next(r, c) + biases_[l][c];
        next(r, c) = hidden && !(v > 0.0) ? 0.0 : v;
      }
    }
    h = std::move(next);
  }
  return h;
}

std::vector<Array2*> Mlp::parameters() {
  std::vector<Array2*> out;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.push_back(&weights_[l]);
    out.push_back(&biases_[l]);
  }
  return out;
}

std::vector<const Array2*> Mlp::parameters() const {
  std::vector<const Array2*> out;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.push_back(&weights_[l]);
    out.push_back(&biases_[l]);
  }
  return out;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const Array2* p : parameters()) n += p->size();
  return n;
}

std::vector<Array2> Mlp::gradients(const Tape& tape, const std::vector<Var>& bound) {
  std::vector<Array2> out;
  out.reserve(bound.size());
  for (Var v : bound) out.push_back(tape.grad(v));
  return out;
}

bool Mlp::all_finite() const {
  for (const Array2* p : parameters()) {
    if (!p->all_finite()) return false;
  }
  return true;
}

}  // namespace rispoison::nn
