#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rispoison/nn/array2.hpp"

namespace rispoison::nn {

/// Handle to a node recorded on a Tape. Only meaningful for the tape that made it.
struct Var {
  std::uint32_t id = 0;
};

/// Reverse-mode autodiff over Array2 values.
///
/// Nodes are appended in evaluation order, so the node list is already a
/// topological order; backward() walks it once in reverse. A node's gradient
/// is fully accumulated by the time the walk reaches it because every consumer
/// has a larger id.
class Tape {
 public:
  enum class Op : std::uint8_t {
    leaf,
    matmul,
    add_bias,
    add,
    sub,
    mul,
    scale,
    add_scalar,
    relu,
    tanh,
    exp,
    log,
    square,
    softplus,
    clamp,
    mean,
    sum_cols,
    min,
    slice_cols,
    concat_cols,
  };

  Tape() { nodes_.reserve(64); }

  /// Leaf that never receives a gradient.
  Var constant(Array2 value);
  /// Leaf that receives a gradient. The tape keeps a pointer; `value` must
  /// outlive the tape and stay unmodified until backward() returns.
  Var parameter(const Array2& value);

  Var matmul(Var a, Var b);
  /// x[r x c] + bias[1 x c], broadcast over rows.
  Var add_bias(Var x, Var bias);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, double s);
  Var add_scalar(Var a, double s);
  Var relu(Var a);
  Var tanh(Var a);
  Var exp(Var a);
  Var log(Var a);
  Var square(Var a);
  Var softplus(Var a);
  /// Elementwise clamp; gradient passes only strictly inside (lo, hi).
  Var clamp(Var a, double lo, double hi);
  /// Mean over all entries, 1 x 1.
  Var mean(Var a);
  /// Row sums, rows x 1.
  Var sum_cols(Var a);
  /// Elementwise minimum; the gradient is routed to the selected operand
  /// (to `a` on ties).
  Var min(Var a, Var b);
  Var slice_cols(Var a, std::size_t begin, std::size_t end);
  Var concat_cols(Var a, Var b);

  const Array2& value(Var v) const;
  /// Gradient of the last backward() target w.r.t. `v`; zeros if none flowed.
  Array2 grad(Var v) const;
  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }

  /// Accumulates d(loss)/d(node) for every node reachable from `loss`.
  /// Throws UsageError unless `loss` is 1 x 1.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Op op = Op::leaf;
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    double s0 = 0.0;
    double s1 = 0.0;
    bool requires_grad = false;
    const Array2* external = nullptr;
    Array2 value;
    Array2 grad;
  };

  Var push(Node node);
  const Array2& val(std::uint32_t id) const;
  Array2& grad_buffer(std::uint32_t id);
  void propagate(std::uint32_t id);

  std::vector<Node> nodes_;
};

}  // namespace rispoison::nn
