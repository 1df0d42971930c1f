#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pdlab/harness.hpp"
#include "pdlab/optim.hpp"

using namespace pdlab;
using Catch::Approx;

namespace {

Network<double> one_weight_net() {
  // linear net: 32 weights + bias; tests poke coordinate 0
  return make_network_zeros<double>({ArchKind::linear});
}

GradientSet<double> grad_with(const Network<double>& net, double g0) {
  GradientSet<double> g(net);
  g.layers[0].w[0] = g0;
  return g;
}

}  // namespace

TEST_CASE("make_state fills adagrad accumulators and zeros sgd velocity") {
  const auto net = build_network<double>({ArchKind::double_hidden, {ActKind::relu}}, 1);
  OptimizerConfig ada{OptKind::adagrad, 0.1, 0.1};
  const auto sa = make_state(net, ada);
  REQUIRE(sa.step_counter == 0);
  for (const auto& l : sa.slots.layers) {
    for (double v : l.w) REQUIRE(v == 0.1);
    for (double v : l.b) REQUIRE(v == 0.1);
  }
  OptimizerConfig sgd{OptKind::sgd_momentum, 0.1};
  const auto ss = make_state(net, sgd);
  REQUIRE(ss.step_counter == 0);
  for (const auto& l : ss.slots.layers) {
    for (double v : l.w) REQUIRE(v == 0.0);
    for (double v : l.b) REQUIRE(v == 0.0);
  }
}

TEST_CASE("adagrad leaves parameters and accumulators alone on zero gradient") {
  auto net = one_weight_net();
  net.layers[0].w[0] = 0.75;
  OptimizerConfig cfg{OptKind::adagrad, 0.1, 0.1};
  auto st = make_state(net, cfg);
  const auto g = grad_with(net, 0.0);
  adagrad_step(st, net, g, cfg);
  REQUIRE(net.layers[0].w[0] == 0.75);
  REQUIRE(st.slots.layers[0].w[0] == 0.1);
  REQUIRE(st.step_counter == 1);
}

TEST_CASE("adagrad single-coordinate hand evaluation") {
  auto net = one_weight_net();
  OptimizerConfig cfg{OptKind::adagrad, 0.1, 0.1};
  auto st = make_state(net, cfg);
  adagrad_step(st, net, grad_with(net, 1.0), cfg);
  REQUIRE(st.slots.layers[0].w[0] == Approx(1.1).epsilon(1e-15));
  REQUIRE(net.layers[0].w[0] == Approx(-0.09534625892455922).epsilon(1e-12));

  const double first = net.layers[0].w[0];
  adagrad_step(st, net, grad_with(net, 1.0), cfg);
  const double second_step = std::abs(net.layers[0].w[0] - first);
  REQUIRE(second_step < std::abs(first));
  REQUIRE(second_step == Approx(0.1 / std::sqrt(2.1)).epsilon(1e-12));
}

TEST_CASE("adagrad effective step size is nonincreasing") {
  auto net = one_weight_net();
  OptimizerConfig cfg{OptKind::adagrad, 0.5, 0.1};
  auto st = make_state(net, cfg);
  double prev_step = 1e300;
  double prev_w = 0.0;
  for (int i = 0; i < 100; ++i) {
    adagrad_step(st, net, grad_with(net, 1.0), cfg);
    const double step = std::abs(net.layers[0].w[0] - prev_w);
    REQUIRE(step <= prev_step);
    prev_step = step;
    prev_w = net.layers[0].w[0];
    REQUIRE(st.slots.layers[0].w[0] >= 0.1);  // monotone accumulator
  }
}

TEST_CASE("sgd momentum first-step and decay hand evaluation") {
  OptimizerConfig cfg{OptKind::sgd_momentum, 0.1};
  cfg.momentum = 0.9;
  cfg.decay = 0.001;

  auto net = one_weight_net();
  auto st = make_state(net, cfg);
  sgd_momentum_step(st, net, grad_with(net, 0.0), cfg);
  REQUIRE(net.layers[0].w[0] == 0.0);  // v = 0 and g = 0

  net = one_weight_net();
  st = make_state(net, cfg);
  sgd_momentum_step(st, net, grad_with(net, 1.0), cfg);
  REQUIRE(st.slots.layers[0].w[0] == Approx(-0.1).epsilon(1e-15));
  REQUIRE(net.layers[0].w[0] == Approx(-0.1).epsilon(1e-15));

  // at t = 1000 the inverse-time schedule halves the rate
  net = one_weight_net();
  st = make_state(net, cfg);
  st.step_counter = 1000;
  cfg.momentum = 0.0;
  sgd_momentum_step(st, net, grad_with(net, 1.0), cfg);
  REQUIRE(net.layers[0].w[0] == Approx(-0.05).epsilon(1e-12));
}

TEST_CASE("optimizers are deterministic") {
  const auto net0 = build_network<double>({ArchKind::double_hidden, {ActKind::relu}}, 5);
  const auto grads = backward(net0, 0b1011u, +1);
  for (const OptKind kind : {OptKind::adagrad, OptKind::sgd_momentum}) {
    OptimizerConfig cfg;
    cfg.kind = kind;
    auto na = net0, nb = net0;
    auto sa = make_state(na, cfg), sb = make_state(nb, cfg);
    optimizer_step(sa, na, grads, cfg);
    optimizer_step(sb, nb, grads, cfg);
    REQUIRE(flatten_parameters(na) == flatten_parameters(nb));
  }
}

TEST_CASE("one small adagrad step decreases convex batch loss") {
  Rng rng(606);
  for (int trial = 0; trial < 100; ++trial) {
    const GroundTruth truth = sample_truth(TruthKind::linear, rng);
    auto net = build_network<double>({ArchKind::linear}, rng.next_u64());
    std::vector<Example> batch(16);
    for (auto& e : batch) e = sample_example(truth, rng);

    auto batch_loss = [&](const Network<double>& n) {
      double s = 0.0;
      for (const auto& e : batch) s += logistic_loss(forward(n, e.x).logit, e.y);
      return s / batch.size();
    };

    GradientSet<double> grads(net);
    Workspace<double> ws;
    ws.resize(net);
    for (const auto& e : batch) backward_accumulate(net, e.x, e.y, grads, ws);
    grads.scale(1.0 / batch.size());

    const double before = batch_loss(net);
    OptimizerConfig cfg{OptKind::adagrad, 0.01, 0.1};
    auto st = make_state(net, cfg);
    adagrad_step(st, net, grads, cfg);
    REQUIRE(batch_loss(net) < before);
  }
}

TEST_CASE("shape mismatch is rejected") {
  auto net = build_network<double>({ArchKind::double_hidden, {ActKind::relu}}, 5);
  const auto other = build_network<double>({ArchKind::single_hidden, {ActKind::relu}}, 5);
  GradientSet<double> wrong(other);
  OptimizerConfig cfg;
  auto st = make_state(net, cfg);
  REQUIRE_THROWS_AS(adagrad_step(st, net, wrong, cfg), std::invalid_argument);
}
