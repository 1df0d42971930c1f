#pragma once
// Paired-model experiment protocol: one ground truth per experiment, M/2
// pairs with per-pair seeds, single-pass mini-batch training on windowed
// streams, per-pair evaluation, and deterministic aggregation in pair-index
// order regardless of worker parallelism.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "pdlab/datagen.hpp"
#include "pdlab/metrics.hpp"
#include "pdlab/network.hpp"
#include "pdlab/optim.hpp"
#include "pdlab/stream.hpp"

namespace pdlab {

struct WarmStart {
  bool enabled = false;
  std::string teacher_checkpoint;  // empty: train the teacher in-process
  double lr_ratio = 0.1;
};

struct ExperimentConfig {
  TruthKind truth_kind = TruthKind::linear;
  ArchitectureSpec arch{};
  OptimizerConfig optim{};
  StreamConfig stream{};
  int pair_count = 8;  // M/2
  InitMode init_mode = InitMode::identical;
  std::size_t eval_size = 1u << 13;
  bool emulate_batch_order = false;
  Precision precision = Precision::f64;
  WarmStart warm{};

  void validate() const {
    arch.validate();
    optim.validate();
    stream.validate();
    if (pair_count < 1) throw std::invalid_argument("harness.pairs must be >= 1");
    if (eval_size < 1) throw std::invalid_argument("harness.eval_size must be >= 1");
    if (warm.enabled && !(warm.lr_ratio > 0.0)) {
      throw std::invalid_argument("harness.warm_lr_ratio must be positive");
    }
  }
};

inline GroundTruth experiment_truth(const ExperimentConfig& cfg) {
  Rng rng(derive_seed(cfg.stream.master_seed, StreamTag::truth, 0));
  return sample_truth(cfg.truth_kind, rng);
}

class TrainDiverged : public std::runtime_error {
 public:
  explicit TrainDiverged(const std::string& what) : std::runtime_error(what) {}
};

struct TrainOptions {
  std::optional<std::uint64_t> emul_seed{};  // intra-batch accumulation order
  double lr_scale = 1.0;
  const std::vector<double>* init_params = nullptr;  // warm start
};

// One pass over the stream; one optimizer step per mini-batch on the mean
// batch gradient. With emulation on, per-example gradients are accumulated in
// a random order drawn per batch, which perturbs nothing but rounding.
template <class Real>
Network<Real> train_single(const ArchitectureSpec& arch, const OptimizerConfig& ocfg,
                           WindowedStream& stream, std::uint64_t init_seed,
                           const TrainOptions& opts = {}) {
  Network<Real> net;
  if (opts.init_params != nullptr) {
    net = make_network_zeros<Real>(arch);
    load_flat_parameters(net, *opts.init_params);
  } else {
    net = build_network<Real>(arch, init_seed);
  }
  OptimizerConfig ocfg_eff = ocfg;
  ocfg_eff.lr *= opts.lr_scale;
  auto state = make_state(net, ocfg_eff);
  GradientSet<Real> grads(net);
  Workspace<Real> ws;
  ws.resize(net);

  std::vector<std::uint32_t> order;
  std::uint64_t step = 0;
  for (;;) {
    const auto batch = stream.next_batch();
    if (batch.empty()) break;
    grads.zero();
    double batch_loss = 0.0;
    if (opts.emul_seed.has_value()) {
      order.resize(batch.size());
      for (std::uint32_t i = 0; i < batch.size(); ++i) order[i] = i;
      Rng rng(derive_seed(*opts.emul_seed, StreamTag::batch_order, step));
      shuffle_in_place(order, rng);
      for (const std::uint32_t i : order) {
        batch_loss += backward_accumulate(net, batch[i].x, batch[i].y, grads, ws);
      }
    } else {
      for (const Example& e : batch) {
        batch_loss += backward_accumulate(net, e.x, e.y, grads, ws);
      }
    }
    if (!std::isfinite(batch_loss)) {
      throw TrainDiverged("non-finite batch loss at step " + std::to_string(step));
    }
    grads.scale(Real(1) / static_cast<Real>(batch.size()));
    optimizer_step(state, net, grads, ocfg_eff);
    if ((step & 0xFFF) == 0 && !net.finite()) {
      throw TrainDiverged("non-finite parameter at step " + std::to_string(step));
    }
    ++step;
  }
  if (!net.finite()) throw TrainDiverged("non-finite parameter after training");
  return net;
}

struct PairOutcome {
  bool completed = false;
  std::string error;
  PairReport report{};
  std::vector<std::uint8_t> checkpoint_a, checkpoint_b;  // when captured
};

namespace detail {

template <class Real>
PairOutcome train_pair_impl(const ExperimentConfig& cfg, const GroundTruth& truth,
                            int pair_index, const std::vector<double>* teacher_params,
                            bool capture_checkpoints) {
  const PairSeeds seeds =
      derive_pair_seeds(cfg.stream.master_seed, std::uint64_t(pair_index), cfg.init_mode);

  TrainOptions oa, ob;
  if (cfg.emulate_batch_order) {
    oa.emul_seed = seeds.emul_seed_a;
    ob.emul_seed = seeds.emul_seed_b;
  }
  if (teacher_params != nullptr) {
    oa.init_params = teacher_params;
    ob.init_params = teacher_params;
    oa.lr_scale = ob.lr_scale = cfg.warm.lr_ratio;
  }

  WindowedStream stream_a(cfg.stream, seeds.data_seed, seeds.shuffle_seed_a, truth);
  auto net_a = train_single<Real>(cfg.arch, cfg.optim, stream_a, seeds.init_seed_a, oa);
  WindowedStream stream_b(cfg.stream, seeds.data_seed, seeds.shuffle_seed_b, truth);
  auto net_b = train_single<Real>(cfg.arch, cfg.optim, stream_b, seeds.init_seed_b, ob);

  Rng eval_rng(derive_seed(seeds.data_seed, StreamTag::eval_data, 0));
  const EvalSet eval = draw_eval_set(truth, eval_rng, cfg.eval_size);
  const auto pa = predict_positive(net_a, eval);
  const auto pb = predict_positive(net_b, eval);

  PairOutcome out;
  out.completed = true;
  out.report.pair_index = pair_index;
  out.report.excess_loss_a = excess_label_loss(eval.p_true_pos, pa);
  out.report.excess_loss_b = excess_label_loss(eval.p_true_pos, pb);
  out.report.relative_pd = relative_pd(eval.p_true_pos, pa, pb);
  out.report.init_seed_a = seeds.init_seed_a;
  out.report.init_seed_b = seeds.init_seed_b;
  if (cfg.arch.kind == ArchKind::linear && truth.kind == TruthKind::linear) {
    const auto fa = flatten_parameters(net_a);
    const auto fb = flatten_parameters(net_b);
    out.report.diff_cosine =
        diff_cosine(std::span(fa).first(kNumFeatures), std::span(fb).first(kNumFeatures),
                    std::span(truth.linear.theta.data(), kNumFeatures));
  }
  if (capture_checkpoints) {
    out.checkpoint_a = checkpoint_bytes(net_a);
    out.checkpoint_b = checkpoint_bytes(net_b);
  }
  return out;
}

}  // namespace detail

inline PairOutcome train_pair(const ExperimentConfig& cfg, const GroundTruth& truth,
                              int pair_index,
                              const std::vector<double>* teacher_params = nullptr,
                              bool capture_checkpoints = false) {
  if (cfg.precision == Precision::f32) {
    return detail::train_pair_impl<float>(cfg, truth, pair_index, teacher_params,
                                          capture_checkpoints);
  }
  return detail::train_pair_impl<double>(cfg, truth, pair_index, teacher_params,
                                         capture_checkpoints);
}

// Warm-start teacher: same architecture and training length, trained on a
// dedicated stream disjoint from every pair stream.
inline std::vector<double> train_teacher(const ExperimentConfig& cfg,
                                         const GroundTruth& truth) {
  const std::uint64_t init_seed =
      derive_seed(cfg.stream.master_seed, StreamTag::teacher, 0);
  const std::uint64_t data_seed =
      derive_seed(cfg.stream.master_seed, StreamTag::teacher, 1);
  const std::uint64_t shuffle_seed =
      derive_seed(cfg.stream.master_seed, StreamTag::teacher, 2);
  WindowedStream stream(cfg.stream, data_seed, shuffle_seed, truth);
  if (cfg.precision == Precision::f32) {
    return flatten_parameters(
        train_single<float>(cfg.arch, cfg.optim, stream, init_seed));
  }
  return flatten_parameters(
      train_single<double>(cfg.arch, cfg.optim, stream, init_seed));
}

struct ExperimentAggregate {
  double mean_pd = 0.0;
  double se_pd = 0.0;
  double mean_loss = 0.0;
  double se_loss = 0.0;
  int completed_pairs = 0;
  double stuck_rate = 0.0;
};

struct ExperimentResult {
  GroundTruth truth;
  std::vector<PairOutcome> pairs;
  ExperimentAggregate aggregate;
  std::vector<double> teacher_params;  // nonempty for warm-start experiments
};

namespace detail {

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double se_of(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size() - 1)) /
         std::sqrt(static_cast<double>(v.size()));
}

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n == 0) return 0.0;
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

// Trains every pair (worker threads pick pairs off a shared counter) and
// aggregates mean / standard error over completed pairs in index order.
// A pair whose mean loss exceeds 5x the experiment median is flagged stuck
// but stays in the aggregates.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads = 1,
                                       bool capture_checkpoints = false) {
  cfg.validate();
  ExperimentResult res;
  res.truth = experiment_truth(cfg);

  const std::vector<double>* teacher = nullptr;
  if (cfg.warm.enabled) {
    if (!cfg.warm.teacher_checkpoint.empty()) {
      const Checkpoint ck = load_checkpoint(cfg.warm.teacher_checkpoint);
      if (!spec_compatible(ck.spec, cfg.arch)) {
        throw std::invalid_argument(
            "teacher checkpoint architecture does not match the experiment");
      }
      res.teacher_params = ck.params;
    } else {
      res.teacher_params = train_teacher(cfg, res.truth);
    }
    teacher = &res.teacher_params;
  }

  res.pairs.resize(cfg.pair_count);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int k = next.fetch_add(1);
      if (k >= cfg.pair_count) return;
      try {
        res.pairs[k] = train_pair(cfg, res.truth, k, teacher, capture_checkpoints);
      } catch (const std::exception& e) {
        res.pairs[k].completed = false;
        res.pairs[k].error = e.what();
        res.pairs[k].report.pair_index = k;
      }
    }
  };
  const int nthreads = std::max(1, std::min(threads, cfg.pair_count));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<double> pds, losses;
  for (const auto& p : res.pairs) {
    if (!p.completed) continue;
    pds.push_back(p.report.relative_pd);
    losses.push_back(0.5 * (p.report.excess_loss_a + p.report.excess_loss_b));
  }
  const double median_loss = detail::median_of(losses);
  int stuck = 0;
  for (auto& p : res.pairs) {
    if (!p.completed) continue;
    const double pair_loss = 0.5 * (p.report.excess_loss_a + p.report.excess_loss_b);
    if (median_loss > 0.0 && pair_loss > 5.0 * median_loss) {
      p.report.stuck = true;
      ++stuck;
    }
  }
  res.aggregate.mean_pd = detail::mean_of(pds);
  res.aggregate.se_pd = detail::se_of(pds, res.aggregate.mean_pd);
  res.aggregate.mean_loss = detail::mean_of(losses);
  res.aggregate.se_loss = detail::se_of(losses, res.aggregate.mean_loss);
  res.aggregate.completed_pairs = static_cast<int>(pds.size());
  res.aggregate.stuck_rate =
      pds.empty() ? 0.0 : static_cast<double>(stuck) / static_cast<double>(pds.size());
  return res;
}

// Single-pair warm start against an existing teacher checkpoint.
inline PairReport warm_start_pair(ExperimentConfig cfg,
                                  const std::string& teacher_checkpoint,
                                  int pair_index = 0) {
  cfg.warm.enabled = true;
  cfg.warm.teacher_checkpoint = teacher_checkpoint;
  cfg.validate();
  const Checkpoint ck = load_checkpoint(teacher_checkpoint);
  if (!spec_compatible(ck.spec, cfg.arch)) {
    throw std::invalid_argument(
        "teacher checkpoint architecture does not match the experiment");
  }
  const GroundTruth truth = experiment_truth(cfg);
  return train_pair(cfg, truth, pair_index, &ck.params).report;
}

// Legend label: activation + hidden unit count, "diff" for distinct
// initialization, "TL" for warm-started models.
inline std::string variant_label(const ExperimentConfig& cfg) {
  std::string label;
  switch (cfg.arch.kind) {
    case ArchKind::linear:
      label = "linear";
      break;
    case ArchKind::single_hidden:
    case ArchKind::double_hidden:
      label = std::string(act_name(cfg.arch.activation.kind)) +
              (cfg.arch.kind == ArchKind::single_hidden ? "1" : "2");
      break;
    case ArchKind::wide_embedding:
      label = std::string(act_name(cfg.arch.activation.kind)) +
              std::to_string(cfg.arch.hidden_widths()[0]);
      break;
    case ArchKind::tower:
    case ArchKind::quad_tower: {
      // '-' separated so labels stay single CSV fields
      label = act_name(cfg.arch.activation.kind);
      label += "[";
      const auto widths = cfg.arch.hidden_widths();
      for (std::size_t i = 0; i < widths.size(); ++i) {
        if (i > 0) label += "-";
        label += std::to_string(widths[i]);
      }
      label += "]";
      break;
    }
  }
  if (activation_needs_beta(cfg.arch.activation.kind) &&
      cfg.arch.kind != ArchKind::linear) {
    std::ostringstream b;
    b << " b=" << cfg.arch.activation.beta;
    label += b.str();
  }
  if (cfg.init_mode == InitMode::distinct) label += " diff";
  if (cfg.warm.enabled) label += " TL";
  return label;
}

struct SweepRow {
  std::string variant;
  int log2_z = 0;
  double mean_pd = 0.0;
  double se_pd = 0.0;
  double mean_loss = 0.0;
  double se_loss = 0.0;
};

struct SweepVariant {
  std::string label;
  ExperimentConfig config;
};

struct SweepReport {
  std::vector<SweepVariant> variants;
  std::vector<SweepRow> rows;
  // pair reports tagged with the variant they came from
  struct PairEntry {
    std::size_t variant_index = 0;
    int log2_z = 0;
    PairReport report;
  };
  std::vector<PairEntry> pair_entries;
};

// Runs every (variant, z) experiment, z ascending. The callback receives
// (variant index, log2 z, resolved config) and returns the experiment result.
template <class PerExperiment>
SweepReport sweep(std::vector<SweepVariant> variants, std::vector<int> log2_zs,
                  PerExperiment&& per_experiment) {
  if (log2_zs.empty()) throw std::invalid_argument("sweep needs at least one z value");
  std::sort(log2_zs.begin(), log2_zs.end());
  log2_zs.erase(std::unique(log2_zs.begin(), log2_zs.end()), log2_zs.end());
  SweepReport report;
  report.variants = std::move(variants);
  for (std::size_t vi = 0; vi < report.variants.size(); ++vi) {
    const SweepVariant& variant = report.variants[vi];
    for (const int lz : log2_zs) {
      ExperimentConfig cfg = variant.config;
      if (lz < 0 || lz > 24) throw std::invalid_argument("log2_z must be in 0..24");
      cfg.stream.window_batches = 1 << lz;
      const ExperimentResult res = per_experiment(vi, lz, cfg);
      SweepRow row;
      row.variant = variant.label;
      row.log2_z = lz;
      row.mean_pd = res.aggregate.mean_pd;
      row.se_pd = res.aggregate.se_pd;
      row.mean_loss = res.aggregate.mean_loss;
      row.se_loss = res.aggregate.se_loss;
      report.rows.push_back(row);
      for (const auto& p : res.pairs) {
        if (p.completed) report.pair_entries.push_back({vi, lz, p.report});
      }
    }
  }
  return report;
}

inline SweepReport sweep(std::vector<SweepVariant> variants,
                         const std::vector<int>& log2_zs, int threads = 1) {
  return sweep(std::move(variants), log2_zs,
               [threads](std::size_t, int, const ExperimentConfig& cfg) {
                 return run_experiment(cfg, threads);
               });
}

}  // namespace pdlab
