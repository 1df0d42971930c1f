#pragma once
// Per-coordinate AdaGrad and SGD with momentum and inverse-time decay.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "pdlab/network.hpp"

namespace pdlab {

enum class OptKind { adagrad, sgd_momentum };

inline const char* opt_name(OptKind k) {
  return k == OptKind::adagrad ? "adagrad" : "sgd";
}

struct OptimizerConfig {
  OptKind kind = OptKind::adagrad;
  double lr = 0.1;
  double acc_init = 0.1;  // AdaGrad accumulator initialization
  double momentum = 0.9;  // SGD
  double decay = 0.001;   // SGD inverse-time decay rate

  void validate() const {
    if (!(lr > 0.0)) throw std::invalid_argument("optim.lr must be positive");
    if (acc_init < 0.0) throw std::invalid_argument("optim.acc_init must be nonnegative");
    if (momentum < 0.0 || momentum >= 1.0) {
      throw std::invalid_argument("optim.momentum must be in [0,1)");
    }
    if (decay < 0.0) throw std::invalid_argument("optim.decay must be nonnegative");
  }
};

// One slot per parameter: squared-gradient accumulator (AdaGrad) or velocity
// (SGD), in the network's canonical parameter order.
template <class Real>
struct OptimizerState {
  GradientSet<Real> slots;
  std::uint64_t step_counter = 0;
};

template <class Real>
OptimizerState<Real> make_state(const Network<Real>& net, const OptimizerConfig& cfg) {
  OptimizerState<Real> st;
  st.slots.resize_like(net);
  if (cfg.kind == OptKind::adagrad) {
    const Real init = static_cast<Real>(cfg.acc_init);
    auto fill = [init](std::vector<Real>& v) {
      for (auto& x : v) x = init;
    };
    fill(st.slots.embeddings[0]);
    fill(st.slots.embeddings[1]);
    for (auto& l : st.slots.layers) {
      fill(l.w);
      fill(l.b);
    }
  }
  return st;
}

namespace detail {

template <class Real, class F>
void visit_param_arrays(Network<Real>& net, const GradientSet<Real>& grads,
                        OptimizerState<Real>& st, F&& f) {
  auto check = [](std::size_t a, std::size_t b) {
    if (a != b) throw std::invalid_argument("gradient/state shape mismatch");
  };
  for (int t = 0; t < 2; ++t) {
    check(net.embeddings[t].size(), grads.embeddings[t].size());
    check(net.embeddings[t].size(), st.slots.embeddings[t].size());
    f(net.embeddings[t].data(), grads.embeddings[t].data(),
      st.slots.embeddings[t].data(), net.embeddings[t].size());
  }
  check(net.layers.size(), grads.layers.size());
  check(net.layers.size(), st.slots.layers.size());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    check(net.layers[l].w.size(), grads.layers[l].w.size());
    check(net.layers[l].w.size(), st.slots.layers[l].w.size());
    check(net.layers[l].b.size(), grads.layers[l].b.size());
    check(net.layers[l].b.size(), st.slots.layers[l].b.size());
    f(net.layers[l].w.data(), grads.layers[l].w.data(), st.slots.layers[l].w.data(),
      net.layers[l].w.size());
    f(net.layers[l].b.data(), grads.layers[l].b.data(), st.slots.layers[l].b.data(),
      net.layers[l].b.size());
  }
}

}  // namespace detail

// acc += g^2; w -= lr * g / sqrt(acc). Zero gradients leave both the
// parameter and the accumulator untouched.
template <class Real>
void adagrad_step(OptimizerState<Real>& st, Network<Real>& net,
                  const GradientSet<Real>& grads, const OptimizerConfig& cfg) {
  const Real lr = static_cast<Real>(cfg.lr);
  detail::visit_param_arrays(net, grads, st,
                             [lr](Real* w, const Real* g, Real* acc, std::size_t n) {
                               for (std::size_t i = 0; i < n; ++i) {
                                 const Real gi = g[i];
                                 if (gi == Real(0)) continue;
                                 acc[i] += gi * gi;
                                 w[i] -= lr * gi / std::sqrt(acc[i]);
                               }
                             });
  ++st.step_counter;
}

// lr_t = lr / (1 + decay * t); v = momentum * v - lr_t * g; w += v.
template <class Real>
void sgd_momentum_step(OptimizerState<Real>& st, Network<Real>& net,
                       const GradientSet<Real>& grads, const OptimizerConfig& cfg) {
  const Real lr_t = static_cast<Real>(
      cfg.lr / (1.0 + cfg.decay * static_cast<double>(st.step_counter)));
  const Real m = static_cast<Real>(cfg.momentum);
  detail::visit_param_arrays(net, grads, st,
                             [lr_t, m](Real* w, const Real* g, Real* v, std::size_t n) {
                               for (std::size_t i = 0; i < n; ++i) {
                                 v[i] = m * v[i] - lr_t * g[i];
                                 w[i] += v[i];
                               }
                             });
  ++st.step_counter;
}

template <class Real>
void optimizer_step(OptimizerState<Real>& st, Network<Real>& net,
                    const GradientSet<Real>& grads, const OptimizerConfig& cfg) {
  if (cfg.kind == OptKind::adagrad) {
    adagrad_step(st, net, grads, cfg);
  } else {
    sgd_momentum_step(st, net, grads, cfg);
  }
}

}  // namespace pdlab
