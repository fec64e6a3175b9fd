#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "rispoison/errors.hpp"
#include "rispoison/nn/adam.hpp"
#include "rispoison/nn/mlp.hpp"
#include "rispoison/nn/tape.hpp"

using namespace rispoison;
using namespace rispoison::nn;

namespace {

// Independent oracle: plain loops, no kernels.
Array2 naive_forward(const Mlp& net, const Array2& x) {
  Array2 h = x;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const Array2& w = net.weight(l);
    Array2 out(h.rows(), w.cols());
    for (std::size_t r = 0; r < h.rows(); ++r) {
      for (std::size_t c = 0; c < w.cols(); ++c) {
        double s = net.bias(l)[c];
        for (std::size_t p = 0; p < w.rows(); ++p) s += h(r, p) * w(p, c);
        out(r, c) = (l + 1 < net.layer_count() && s < 0.0) ? 0.0 : s;
      }
    }
    h = out;
  }
  return h;
}

// Loss used by the gradient checks: mean((net(x) - target)^2) + mean(tanh(net(x))).
double loss_value(const Mlp& net, const Array2& x, const Array2& target) {
  const Array2 y = naive_forward(net, x);
  double sq = 0.0, th = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sq += (y[i] - target[i]) * (y[i] - target[i]);
    th += std::tanh(y[i]);
  }
  return (sq + th) / static_cast<double>(y.size());
}

std::vector<Array2> tape_gradients(const Mlp& net, const Array2& x, const Array2& target) {
  Tape tape;
  std::vector<Var> bound;
  const Var y = net.forward(tape, tape.constant(x), &bound);
  const Var sq = tape.mean(tape.square(tape.sub(y, tape.constant(target))));
  const Var loss = tape.add(sq, tape.mean(tape.tanh(y)));
  tape.backward(loss);
  return Mlp::gradients(tape, bound);
}

bool grad_close(double analytic, double numeric) {
  return std::abs(analytic - numeric) <= std::max(1e-6, 1e-4 * std::abs(numeric));
}

// Central differences with h = 1e-5 against every parameter entry.
void check_mlp_gradients(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> layers(1, 3), width(1, 16), rows(1, 5);
  std::vector<std::size_t> widths{static_cast<std::size_t>(width(rng))};
  const int depth = layers(rng);
  for (int i = 0; i < depth; ++i) widths.push_back(static_cast<std::size_t>(width(rng)));
  Mlp net(widths, rng);
  std::normal_distribution<double> g(0.0, 1.0);
  Array2 x(static_cast<std::size_t>(rows(rng)), widths.front());
  Array2 target(x.rows(), widths.back());
  for (double& v : x.data()) v = g(rng);
  for (double& v : target.data()) v = g(rng);

  const auto grads = tape_gradients(net, x, target);
  auto params = net.parameters();
  for (std::size_t p = 0; p < params.size(); ++p) {
    for (std::size_t i = 0; i < params[p]->size(); ++i) {
      const double saved = (*params[p])[i];
      (*params[p])[i] = saved + 1e-5;
      const double up = loss_value(net, x, target);
      (*params[p])[i] = saved - 1e-5;
      const double down = loss_value(net, x, target);
      (*params[p])[i] = saved;
      const double numeric = (up - down) / 2e-5;
      INFO("param " << p << " entry " << i << " analytic " << grads[p][i] << " numeric " << numeric);
      REQUIRE(grad_close(grads[p][i], numeric));
    }
  }
}

double fd_scalar(const std::function<double(double)>& f, double x) {
  return (f(x + 1e-5) - f(x - 1e-5)) / 2e-5;
}

}  // namespace

TEST_CASE("forward: identity and constant networks") {
  std::mt19937_64 rng(0);
  Mlp net({2, 2}, rng);
  net.weight(0) = Array2::from_rows({{1, 0}, {0, 1}});
  net.bias(0) = Array2(1, 2, 0.0);
  Tape tape;
  const Var y = net.forward(tape, tape.constant(Array2::from_rows({{1, 2}})));
  CHECK(tape.value(y) == Array2::from_rows({{1, 2}}));

  Mlp c({3, 1}, rng);
  c.weight(0) = Array2(3, 1, 0.0);
  c.bias(0) = Array2::from_rows({{3}});
  CHECK(c.predict(Array2::from_rows({{-4, 9, 0.5}}))[0] == 3.0);
}

TEST_CASE("forward: two-layer net matches hand-rolled matrix arithmetic") {
  std::mt19937_64 rng(0);
  Mlp net({2, 3, 2}, rng);
  net.weight(0) = Array2::from_rows({{0.5, -1.0, 2.0}, {1.5, 0.25, -0.75}});
  net.bias(0) = Array2::from_rows({{0.1, 0.2, -0.3}});
  net.weight(1) = Array2::from_rows({{1.0, -2.0}, {0.5, 0.5}, {-1.0, 3.0}});
  net.bias(1) = Array2::from_rows({{0.05, -0.05}});
  const Array2 x = Array2::from_rows({{1, 0}});
  // hidden = relu([0.6, -0.8, 1.7]) = [0.6, 0, 1.7]
  // out = [0.6 - 1.7 + 0.05, -1.2 + 5.1 - 0.05] = [-1.05, 3.85]
  const Array2 expected = Array2::from_rows({{-1.05, 3.85}});
  const Array2 oracle = naive_forward(net, x);
  Tape tape;
  const Array2 got = tape.value(net.forward(tape, tape.constant(x)));
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(got[i] == doctest::Approx(expected[i]).epsilon(1e-14));
    CHECK(got[i] == doctest::Approx(oracle[i]).epsilon(1e-14));
    CHECK(net.predict(x)[i] == doctest::Approx(oracle[i]).epsilon(1e-14));
  }
}

TEST_CASE("forward: dimension mismatch is a configuration error") {
  std::mt19937_64 rng(0);
  Mlp net({3, 4, 1}, rng);
  Tape tape;
  CHECK_THROWS_AS(net.forward(tape, tape.constant(Array2(2, 2))), ConfigError);
  CHECK_THROWS_AS(net.predict(Array2(1, 4)), ConfigError);
  CHECK_THROWS_AS(tape.matmul(tape.constant(Array2(2, 3)), tape.constant(Array2(2, 3))),
                  ConfigError);
}

TEST_CASE("backward: closed-form cases") {
  Array2 w = Array2::from_rows({{1.7}});
  {
    Tape tape;
    const Var wv = tape.parameter(w);
    const Var loss = tape.matmul(wv, tape.constant(Array2::from_rows({{2.0}})));
    tape.backward(loss);
    CHECK(tape.grad(wv)[0] == 2.0);
  }
  {
    Array2 zero = Array2::from_rows({{0.0}});
    Tape tape;
    const Var wv = tape.parameter(zero);
    tape.backward(tape.tanh(wv));
    CHECK(tape.grad(wv)[0] == 1.0);
  }
}

TEST_CASE("backward: non-scalar loss is a usage error") {
  Array2 w(2, 2, 1.0);
  Tape tape;
  const Var v = tape.parameter(w);
  CHECK_THROWS_AS(tape.backward(tape.relu(v)), UsageError);
}

TEST_CASE("backward: each primitive matches finite differences") {
  // Every op is checked on a scalar input x through f(x) -> mean(...).
  struct Case {
    const char* name;
    std::function<Var(Tape&, Var)> build;
    double at;
  };
  const std::vector<Case> cases = {
      {"exp", [](Tape& t, Var x) { return t.exp(x); }, 0.3},
      {"log", [](Tape& t, Var x) { return t.log(x); }, 1.7},
      {"square", [](Tape& t, Var x) { return t.square(x); }, -0.8},
      {"softplus", [](Tape& t, Var x) { return t.softplus(x); }, -1.2},
      {"relu", [](Tape& t, Var x) { return t.relu(x); }, 0.4},
      {"clamp inside", [](Tape& t, Var x) { return t.clamp(x, -1.0, 1.0); }, 0.2},
      {"scale", [](Tape& t, Var x) { return t.scale(x, -2.5); }, 0.9},
      {"add_scalar", [](Tape& t, Var x) { return t.add_scalar(t.square(x), 4.0); }, 0.9},
      {"min selects", [](Tape& t, Var x) { return t.min(t.square(x), t.scale(x, 3.0)); }, 0.5},
      {"mul", [](Tape& t, Var x) { return t.mul(t.exp(x), t.tanh(x)); }, 0.6},
      {"concat+slice",
       [](Tape& t, Var x) {
         const Var both = t.concat_cols(t.square(x), t.exp(x));
         return t.sum_cols(t.slice_cols(both, 0, 2));
       },
       0.7},
  };
  for (const Case& c : cases) {
    auto eval = [&](double x) {
      Tape t;
      return t.value(t.mean(c.build(t, t.constant(Array2::from_rows({{x}})))))[0];
    };
    Array2 x = Array2::from_rows({{c.at}});
    Tape t;
    const Var xv = t.parameter(x);
    t.backward(t.mean(c.build(t, xv)));
    INFO(c.name);
    CHECK(grad_close(t.grad(xv)[0], fd_scalar(eval, c.at)));
  }
}

TEST_CASE("backward: clamp blocks gradient outside its range") {
  Array2 x = Array2::from_rows({{-30.0, 5.0}});
  Tape t;
  const Var xv = t.parameter(x);
  t.backward(t.mean(t.clamp(xv, -20.0, 2.0)));
  CHECK(t.grad(xv)[0] == 0.0);
  CHECK(t.grad(xv)[1] == 0.0);
}

TEST_CASE("backward: shared subexpression accumulates from every consumer") {
  Array2 x = Array2::from_rows({{1.5}});
  Tape t;
  const Var xv = t.parameter(x);
  const Var s = t.square(xv);
  t.backward(t.mean(t.add(s, t.mul(s, xv))));  // x^2 + x^3
  CHECK(t.grad(xv)[0] == doctest::Approx(2 * 1.5 + 3 * 1.5 * 1.5));
}

TEST_CASE("property: MLP gradients agree with central differences") {
  std::mt19937_64 rng(20240611);
  for (int trial = 0; trial < 20; ++trial) check_mlp_gradients(rng);
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  Array2 p = Array2::from_rows({{1.0, -2.0, 3.0}});
  const Array2 before = p;
  Adam opt({}, {&p});
  opt.step({&p}, {Array2(1, 3, 0.0)});
  CHECK(p == before);
  CHECK(opt.step_count() == 1);
}

TEST_CASE("adam: first step moves by ~learning rate") {
  // m1 = (1-b1) g, v1 = (1-b2) g^2; bias correction gives mhat = g, vhat = g^2,
  // so the step is lr * g / (|g| + eps).
  Array2 p = Array2::from_rows({{0.0}});
  Adam opt({1e-3, 0.9, 0.999, 1e-8}, {&p});
  opt.step({&p}, {Array2::from_rows({{2.0}})});
  CHECK(p[0] == doctest::Approx(-1e-3 * 2.0 / (2.0 + 1e-8)).epsilon(1e-12));
}

TEST_CASE("adam: converges on a scalar quadratic") {
  Array2 x = Array2::from_rows({{-1.0}});
  Adam opt({0.05, 0.9, 0.999, 1e-8}, {&x});
  for (int i = 0; i < 2000; ++i) {
    opt.step({&x}, {Array2::from_rows({{2.0 * (x[0] - 3.0)}})});
  }
  CHECK(x[0] == doctest::Approx(3.0).epsilon(1e-3));
}

TEST_CASE("adam: non-finite gradient aborts without touching parameters") {
  Array2 x = Array2::from_rows({{1.0, 2.0}});
  Adam opt({}, {&x});
  CHECK_THROWS_AS(opt.step({&x}, {Array2::from_rows({{0.1, std::nan("")}})}), DivergenceError);
  CHECK(x == Array2::from_rows({{1.0, 2.0}}));
  CHECK_THROWS_AS(opt.step({&x}, {Array2(2, 1)}), ConfigError);
}

TEST_CASE("determinism: same seed gives identical parameter trajectories") {
  auto train = [] {
    std::mt19937_64 rng(99);
    Mlp net({4, 8, 2}, rng);
    Adam opt({}, std::as_const(net).parameters());
    std::normal_distribution<double> g(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
      Array2 x(3, 4), target(3, 2);
      for (double& v : x.data()) v = g(rng);
      for (double& v : target.data()) v = g(rng);
      opt.step(net.parameters(), tape_gradients(net, x, target));
    }
    return net;
  };
  CHECK(train() == train());
}
