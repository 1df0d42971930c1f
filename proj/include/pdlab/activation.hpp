#pragma once
// Hidden-unit nonlinearities and their exact derivatives.

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pdlab {

template <class Real>
Real sigmoid(Real u) {
  if (u >= Real(0)) {
    return Real(1) / (Real(1) + std::exp(-u));
  }
  const Real e = std::exp(u);
  return e / (Real(1) + e);
}

enum class ActKind { identity, relu, smelu, swish };

struct Activation {
  ActKind kind = ActKind::identity;
  double beta = 1.0;  // half-width (SmeLU) or slope (Swish)
};

template <class Real>
Real activate(const Activation& a, Real u) {
  switch (a.kind) {
    case ActKind::identity:
      return u;
    case ActKind::relu:
      return u > Real(0) ? u : Real(0);
    case ActKind::smelu: {
      const Real beta = static_cast<Real>(a.beta);
      if (u <= -beta) return Real(0);
      if (u >= beta) return u;
      const Real t = u + beta;
      return t * t / (Real(4) * beta);
    }
    case ActKind::swish: {
      const Real beta = static_cast<Real>(a.beta);
      return u * sigmoid(beta * u);
    }
  }
  return u;
}

// Subgradient at the ReLU origin is 0.
template <class Real>
Real activate_grad(const Activation& a, Real u) {
  switch (a.kind) {
    case ActKind::identity:
      return Real(1);
    case ActKind::relu:
      return u > Real(0) ? Real(1) : Real(0);
    case ActKind::smelu: {
      const Real beta = static_cast<Real>(a.beta);
      if (u <= -beta) return Real(0);
      if (u >= beta) return Real(1);
      return (u + beta) / (Real(2) * beta);
    }
    case ActKind::swish: {
      const Real beta = static_cast<Real>(a.beta);
      const Real s = sigmoid(beta * u);
      return s + beta * u * s * (Real(1) - s);
    }
  }
  return Real(1);
}

inline bool activation_needs_beta(ActKind k) {
  return k == ActKind::smelu || k == ActKind::swish;
}

inline const char* act_name(ActKind k) {
  switch (k) {
    case ActKind::identity: return "identity";
    case ActKind::relu: return "relu";
    case ActKind::smelu: return "smelu";
    case ActKind::swish: return "swish";
  }
  return "identity";
}

inline ActKind act_from_name(std::string_view name) {
  if (name == "identity") return ActKind::identity;
  if (name == "relu") return ActKind::relu;
  if (name == "smelu") return ActKind::smelu;
  if (name == "swish") return ActKind::swish;
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

}  // namespace pdlab
