#pragma once
// Evaluation metrics: average excess label loss (mean KL from the true label
// distribution to the model's, in nats) and relative prediction difference on
// the positive label, plus weight-space diagnostics for trained pairs.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdlab/datagen.hpp"
#include "pdlab/network.hpp"
#include "pdlab/rng.hpp"

namespace pdlab {

struct EvalSet {
  std::vector<std::uint32_t> xs;
  std::vector<double> p_true_pos;  // true P(y=+1 | x), strictly inside (0,1)

  std::size_t size() const { return xs.size(); }
};

inline EvalSet draw_eval_set(const GroundTruth& truth, Rng& rng, std::size_t n) {
  EvalSet s;
  s.xs.resize(n);
  s.p_true_pos.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.xs[i] = sample_features(truth, rng);
    s.p_true_pos[i] = label_probability(truth, s.xs[i], +1);
  }
  return s;
}

template <class Real>
std::vector<double> predict_positive(const Network<Real>& net, const EvalSet& eval) {
  Workspace<Real> ws;
  ws.resize(net);
  std::vector<double> p(eval.size());
  for (std::size_t i = 0; i < eval.size(); ++i) {
    p[i] = forward(net, eval.xs[i], ws).p_positive;
  }
  return p;
}

// Mean per-example KL(p_true || p_model) in nats. Model probabilities are
// clamped to [1e-15, 1-1e-15]; a no-op for the logits seen in practice.
inline double excess_label_loss(std::span<const double> p_true_pos,
                                std::span<const double> p_model_pos) {
  if (p_true_pos.empty() || p_true_pos.size() != p_model_pos.size()) {
    throw std::invalid_argument("excess_label_loss: bad prediction vectors");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < p_true_pos.size(); ++i) {
    const double p = p_true_pos[i];
    double q = p_model_pos[i];
    q = std::min(1.0 - 1e-15, std::max(1e-15, q));
    sum += p * std::log(p / q) + (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
  }
  return sum / static_cast<double>(p_true_pos.size());
}

template <class Real>
double excess_label_loss(const GroundTruth&, const Network<Real>& net,
                         const EvalSet& eval) {
  return excess_label_loss(eval.p_true_pos, predict_positive(net, eval));
}

// Mean over examples of |p_a(+1|x) - p_b(+1|x)| / p_true(+1|x) for one pair.
inline double relative_pd(std::span<const double> p_true_pos,
                          std::span<const double> pa, std::span<const double> pb) {
  if (p_true_pos.size() != pa.size() || pa.size() != pb.size() || pa.empty()) {
    throw std::invalid_argument("relative_pd: bad prediction vectors");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    sum += std::abs(pa[i] - pb[i]) / p_true_pos[i];
  }
  return sum / static_cast<double>(pa.size());
}

inline double relative_pd(const EvalSet& eval, std::span<const double> pa,
                          std::span<const double> pb) {
  return relative_pd(eval.p_true_pos, pa, pb);
}

// Cosine between (w_a - theta) and (w_b - theta); empty when either
// difference vector is zero.
inline std::optional<double> diff_cosine(std::span<const double> w_a,
                                         std::span<const double> w_b,
                                         std::span<const double> theta) {
  if (w_a.size() != theta.size() || w_b.size() != theta.size()) {
    throw std::invalid_argument("diff_cosine: length mismatch");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double da = w_a[i] - theta[i];
    const double db = w_b[i] - theta[i];
    dot += da * db;
    na += da * da;
    nb += db * db;
  }
  if (na == 0.0 || nb == 0.0) return std::nullopt;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

struct WeightRow {
  std::string layer_id;
  std::size_t param_index = 0;
  double value_a = 0.0;
  double value_b = 0.0;
};

inline std::vector<WeightRow> weight_pairs_export(const ArchitectureSpec& spec,
                                                  std::span<const double> flat_a,
                                                  std::span<const double> flat_b) {
  if (flat_a.size() != parameter_count(spec) || flat_b.size() != flat_a.size()) {
    throw std::invalid_argument("weight export: parameter vectors do not match spec");
  }
  std::vector<WeightRow> rows;
  rows.reserve(flat_a.size());
  std::size_t k = 0;
  for (const auto& g : parameter_groups(spec)) {
    for (std::size_t i = 0; i < g.count; ++i, ++k) {
      rows.push_back({g.id, i, flat_a[k], flat_b[k]});
    }
  }
  return rows;
}

template <class Real>
std::vector<WeightRow> weight_pairs_export(const Network<Real>& a,
                                           const Network<Real>& b) {
  if (!spec_compatible(a.spec, b.spec)) {
    throw std::invalid_argument("weight export: architecture mismatch");
  }
  const auto fa = flatten_parameters(a);
  const auto fb = flatten_parameters(b);
  return weight_pairs_export(a.spec, fa, fb);
}

// Per-pair evaluation results plus metadata used by reports.
struct PairReport {
  int pair_index = 0;
  double excess_loss_a = 0.0;
  double excess_loss_b = 0.0;
  double relative_pd = 0.0;
  std::optional<double> diff_cosine{};
  bool stuck = false;
  std::uint64_t init_seed_a = 0;
  std::uint64_t init_seed_b = 0;
};

}  // namespace pdlab
