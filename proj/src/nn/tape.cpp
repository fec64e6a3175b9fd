#include "rispoison/nn/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rispoison/errors.hpp"
#include "rispoison/kernels.hpp"

namespace rispoison::nn {
namespace {

void require_same_shape(const Array2& a, const Array2& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ConfigError(std::string("Tape::") + op + ": shape mismatch (" + std::to_string(a.rows()) +
                      "x" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                      std::to_string(b.cols()) + ")");
  }
}

template <typename F>
Array2 map(const Array2& x, F f) {
  Array2 out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i]);
  return out;
}

double stable_softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

const Array2& Tape::val(std::uint32_t id) const {
  const Node& n = nodes_[id];
  return n.external != nullptr ? *n.external : n.value;
}

const Array2& Tape::value(Var v) const {
  if (v.id >= nodes_.size()) throw UsageError("Tape::value: unknown node");
  return val(v.id);
}

Array2 Tape::grad(Var v) const {
  if (v.id >= nodes_.size()) throw UsageError("Tape::grad: unknown node");
  const Node& n = nodes_[v.id];
  if (n.grad.size() == 0) return Array2(val(v.id).rows(), val(v.id).cols());
  return n.grad;
}

Array2& Tape::grad_buffer(std::uint32_t id) {
  Node& n = nodes_[id];
  if (n.grad.size() == 0) {
    const Array2& v = val(id);
    n.grad = Array2(v.rows(), v.cols());
  }
  return n.grad;
}

Var Tape::constant(Array2 value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::parameter(const Array2& value) {
  Node n;
  n.external = &value;
  n.requires_grad = true;
  return push(std::move(n));
}

Var Tape::matmul(Var a, Var b) {
  const Array2& x = val(a.id);
  const Array2& y = val(b.id);
  if (x.cols() != y.rows()) {
    throw ConfigError("Tape::matmul: inner dimensions differ (" + std::to_string(x.cols()) +
                      " vs " + std::to_string(y.rows()) + ")");
  }
  Node n;
  n.op = Op::matmul;
  n.a = a.id;
  n.b = b.id;
  n.requires_grad = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
  n.value = Array2(x.rows(), y.cols());
  kernels::active().gemm_nn(x.rows(), y.cols(), x.cols(), x.data().data(), y.data().data(),
                            n.value.data().data(), false);
  return push(std::move(n));
}

Var Tape::add_bias(Var a, Var b) {
  const Array2& x = val(a.id);
  const Array2& bias = val(b.id);
  if (bias.rows() != 1 || bias.cols() != x.cols()) {
    throw ConfigError("Tape::add_bias: bias must be 1 x " + std::to_string(x.cols()));
  }
  Node n;
  n.op = Op::add_bias;
  n.a = a.id;
  n.b = b.id;
  n.requires_grad = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
  n.value = x;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) n.value(r, c) += bias[c];
  }
  return push(std::move(n));
}

namespace {
template <typename F>
Array2 zip(const Array2& x, const Array2& y, F f) {
  Array2 out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i], y[i]);
  return out;
}
}  // namespace

#define RP_BINARY(name, opcode, expr)                                              \
  Var Tape::name(Var a, Var b) {                                                   \
    require_same_shape(val(a.id), val(b.id), #name);                               \
    Node n;                                                                        \
    n.op = Op::opcode;                                                             \
    n.a = a.id;                                                                    \
    n.b = b.id;                                                                    \
    n.requires_grad = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;    \
    n.value = zip(val(a.id), val(b.id), [](double x, double y) { return expr; }); \
    return push(std::move(n));                                                     \
  }

RP_BINARY(add, add, x + y)
RP_BINARY(sub, sub, x - y)
RP_BINARY(mul, mul, x * y)
RP_BINARY(min, min, (x <= y ? x : y))
#undef RP_BINARY

#define RP_UNARY(name, opcode, expr)                                  \
  Var Tape::name(Var a) {                                             \
    Node n;                                                           \
    n.op = Op::opcode;                                                \
    n.a = a.id;                                                       \
    n.requires_grad = nodes_[a.id].requires_grad;                     \
    n.value = map(val(a.id), [](double x) { return expr; });          \
    return push(std::move(n));                                        \
  }

RP_UNARY(relu, relu, (x > 0.0 ? x : 0.0))
RP_UNARY(tanh, tanh, std::tanh(x))
RP_UNARY(exp, exp, std::exp(x))
RP_UNARY(log, log, std::log(x))
RP_UNARY(square, square, x * x)
RP_UNARY(softplus, softplus, stable_softplus(x))
#undef RP_UNARY

Var Tape::scale(Var a, double s) {
  Node n;
  n.op = Op::scale;
  n.a = a.id;
  n.s0 = s;
  n.requires_grad = nodes_[a.id].requires_grad;
  n.value = map(val(a.id), [s](double x) { return s * x; });
  return push(std::move(n));
}

Var Tape::add_scalar(Var a, double s) {
  Node n;
  n.op = Op::add_scalar;
  n.a = a.id;
  n.s0 = s;
  n.requires_grad = nodes_[a.id].requires_grad;
  n.value = map(val(a.id), [s](double x) { return x + s; });
  return push(std::move(n));
}

Var Tape::clamp(Var a, double lo, double hi) {
  Node n;
  n.op = Op::clamp;
  n.a = a.id;
  n.s0 = lo;
  n.s1 = hi;
  n.requires_grad = nodes_[a.id].requires_grad;
  n.value = map(val(a.id), [lo, hi](double x) { return std::clamp(x, lo, hi); });
  return push(std::move(n));
}

Var Tape::mean(Var a) {
  const Array2& x = val(a.id);
  if (x.size() == 0) throw ConfigError("Tape::mean: empty input");
  double s = 0.0;
  for (double v : x.data()) s += v;
  Node n;
  n.op = Op::mean;
  n.a = a.id;
  n.requires_grad = nodes_[a.id].requires_grad;
  n.value = Array2(1, 1, s / static_cast<double>(x.size()));
  return push(std::move(n));
}

Var Tape::sum_cols(Var a) {
  const Array2& x = val(a.id);
  Node n;
  n.op = Op::sum_cols;
  n.a = a.id;
  n.requires_grad = nodes_[a.id].requires_grad;
  n.value = Array2(x.rows(), 1);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < x.cols(); ++c) s += x(r, c);
    n.value[r] = s;
  }
  return push(std::move(n));
}

Var Tape::slice_cols(Var a, std::size_t begin, std::size_t end) {
  const Array2& x = val(a.id);
  if (begin > end || end > x.cols()) throw ConfigError("Tape::slice_cols: range out of bounds");
  Node n;
  n.op = Op::slice_cols;
  n.a = a.id;
  n.s0 = static_cast<double>(begin);
  n.s1 = static_cast<double>(end);
  n.requires_grad = nodes_[a.id].requires_grad;
  n.value = Array2(x.rows(), end - begin);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = begin; c < end; ++c) n.value(r, c - begin) = x(r, c);
  }
  return push(std::move(n));
}

Var Tape::concat_cols(Var a, Var b) {
  const Array2& x = val(a.id);
  const Array2& y = val(b.id);
  if (x.rows() != y.rows()) throw ConfigError("Tape::concat_cols: row counts differ");
  Node n;
  n.op = Op::concat_cols;
  n.a = a.id;
  n.b = b.id;
  n.requires_grad = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
  n.value = Array2(x.rows(), x.cols() + y.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) n.value(r, c) = x(r, c);
    for (std::size_t c = 0; c < y.cols(); ++c) n.value(r, x.cols() + c) = y(r, c);
  }
  return push(std::move(n));
}

void Tape::backward(Var loss) {
  if (loss.id >= nodes_.size()) throw UsageError("Tape::backward: unknown node");
  const Array2& lv = val(loss.id);
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw UsageError("Tape::backward: loss must be a 1 x 1 scalar node");
  }
  for (Node& n : nodes_) n.grad = Array2();
  grad_buffer(loss.id)[0] = 1.0;
  for (std::uint32_t id = loss.id + 1; id-- > 0;) {
    if (nodes_[id].requires_grad && nodes_[id].grad.size() != 0) propagate(id);
  }
}

void Tape::propagate(std::uint32_t id) {
  // grad_buffer() never grows nodes_, so these references stay valid.
  const Node& n = nodes_[id];
  const Array2& g = n.grad;
  const Array2& y = n.value;
  const auto wants = [this](std::uint32_t in) { return nodes_[in].requires_grad; };
  const auto& k = kernels::active();

  switch (n.op) {
    case Op::leaf:
      break;
    case Op::matmul: {
      const Array2& a = val(n.a);
      const Array2& b = val(n.b);
      if (wants(n.a)) {
        Array2& ga = grad_buffer(n.a);
        k.gemm_nt(a.rows(), a.cols(), g.cols(), g.data().data(), b.data().data(),
                  ga.data().data(), true);
      }
      if (wants(n.b)) {
        Array2& gb = grad_buffer(n.b);
        k.gemm_tn(b.rows(), b.cols(), a.rows(), a.data().data(), g.data().data(),
                  gb.data().data(), true);
      }
      break;
    }
    case Op::add_bias: {
      if (wants(n.a)) {
        Array2& ga = grad_buffer(n.a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (wants(n.b)) {
        Array2& gb = grad_buffer(n.b);
        for (std::size_t r = 0; r < g.rows(); ++r) {
          for (std::size_t c = 0; c < g.cols(); ++c) gb[c] += g(r, c);
        }
      }
      break;
    }
    case Op::add:
    case Op::sub: {
      const double sign = n.op == Op::add ? 1.0 : -1.0;
      if (wants(n.a)) {
        Array2& ga = grad_buffer(n.a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (wants(n.b)) {
        Array2& gb = grad_buffer(n.b);
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += sign * g[i];
      }
      break;
    }
    case Op::mul: {
      const Array2& a = val(n.a);
      const Array2& b = val(n.b);
      if (wants(n.a)) {
        Array2& ga = grad_buffer(n.a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * b[i];
      }
      if (wants(n.b)) {
        Array2& gb = grad_buffer(n.b);
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * a[i];
      }
      break;
    }
    case Op::min: {
      const Array2& a = val(n.a);
      const Array2& b = val(n.b);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const bool pick_a = a[i] <= b[i];
        if (pick_a && wants(n.a)) grad_buffer(n.a)[i] += g[i];
        if (!pick_a && wants(n.b)) grad_buffer(n.b)[i] += g[i];
      }
      break;
    }
    case Op::scale: {
      Array2& ga = grad_buffer(n.a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += n.s0 * g[i];
      break;
    }
    case Op::add_scalar: {
      Array2& ga = grad_buffer(n.a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      break;
    }
    case Op::relu: {
      const Array2& a = val(n.a);
      Array2& ga = grad_buffer(n.a);
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (a[i] > 0.0) ga[i] += g[i];
      }
      break;
    }
    case Op::tanh: {
      Array2& ga = grad_buffer(n.a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
      break;
    }
    case Op::exp: {
      Array2& ga = grad_buffer(n.a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i];
      break;
    }
    case Op::log: {
      const Array2& a = val(n.a);
      Array2& ga = grad_buffer(n.a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] / a[i];
      break;
    }
    case Op::square: {
      const Array2& a = val(n.a);
      Array2& ga = grad_buffer(n.a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += 2.0 * a[i] * g[i];
      break;
    }
    case Op::softplus: {
      const Array2& a = val(n.a);
      Array2& ga = grad_buffer(n.a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * sigmoid(a[i]);
      break;
    }
    case Op::clamp: {
      const Array2& a = val(n.a);
      Array2& ga = grad_buffer(n.a);
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (a[i] > n.s0 && a[i] < n.s1) ga[i] += g[i];
      }
      break;
    }
    case Op::mean: {
      Array2& ga = grad_buffer(n.a);
      const double share = g[0] / static_cast<double>(ga.size());
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += share;
      break;
    }
    case Op::sum_cols: {
      Array2& ga = grad_buffer(n.a);
      for (std::size_t r = 0; r < ga.rows(); ++r) {
        for (std::size_t c = 0; c < ga.cols(); ++c) ga(r, c) += g[r];
      }
      break;
    }
    case Op::slice_cols: {
      Array2& ga = grad_buffer(n.a);
      const auto begin = static_cast<std::size_t>(n.s0);
      for (std::size_t r = 0; r < g.rows(); ++r) {
        for (std::size_t c = 0; c < g.cols(); ++c) ga(r, begin + c) += g(r, c);
      }
      break;
    }
    case Op::concat_cols: {
      const std::size_t left = val(n.a).cols();
      if (wants(n.a)) {
        Array2& ga = grad_buffer(n.a);
        for (std::size_t r = 0; r < g.rows(); ++r) {
          for (std::size_t c = 0; c < left; ++c) ga(r, c) += g(r, c);
        }
      }
      if (wants(n.b)) {
        Array2& gb = grad_buffer(n.b);
        for (std::size_t r = 0; r < g.rows(); ++r) {
          for (std::size_t c = 0; c < gb.cols(); ++c) gb(r, c) += g(r, left + c);
        }
      }
      break;
    }
  }
}

}  // namespace rispoison::nn
