#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>

#include "pdlab/harness.hpp"

using namespace pdlab;
using Catch::Approx;

namespace {

ExperimentConfig small_cfg() {
  ExperimentConfig cfg;
  cfg.truth_kind = TruthKind::linear;
  cfg.arch = {ArchKind::double_hidden, {ActKind::relu}};
  cfg.optim = {OptKind::adagrad, 0.1, 0.1};
  cfg.stream.total_examples = 1u << 12;
  cfg.stream.batch_size = 32;
  cfg.stream.window_batches = 1;
  cfg.stream.master_seed = 99;
  cfg.pair_count = 1;
  cfg.eval_size = 512;
  return cfg;
}

}  // namespace

TEST_CASE("training is deterministic for fixed seeds") {
  const auto cfg = small_cfg();
  const GroundTruth truth = experiment_truth(cfg);
  WindowedStream s1(cfg.stream, 5, 6, truth);
  WindowedStream s2(cfg.stream, 5, 6, truth);
  const auto n1 = train_single<double>(cfg.arch, cfg.optim, s1, 17);
  const auto n2 = train_single<double>(cfg.arch, cfg.optim, s2, 17);
  REQUIRE(flatten_parameters(n1) == flatten_parameters(n2));
}

TEST_CASE("null control: identical init, z=1, emulation off is bit-identical") {
  for (const ArchKind kind :
       {ArchKind::linear, ArchKind::double_hidden, ArchKind::wide_embedding}) {
    auto cfg = small_cfg();
    cfg.arch.kind = kind;
    const GroundTruth truth = experiment_truth(cfg);
    const auto outcome = train_pair(cfg, truth, 0, nullptr, true);
    REQUIRE(outcome.completed);
    REQUIRE(outcome.report.relative_pd == 0.0);
    REQUIRE(outcome.checkpoint_a == outcome.checkpoint_b);
  }
}

TEST_CASE("emulated accumulation order perturbs weights only at rounding scale") {
  auto cfg = small_cfg();
  cfg.arch = {ArchKind::linear};
  cfg.stream.total_examples = 1u << 16;
  const GroundTruth truth = experiment_truth(cfg);
  const auto seeds = derive_pair_seeds(cfg.stream.master_seed, 0, InitMode::identical);

  WindowedStream s1(cfg.stream, seeds.data_seed, seeds.shuffle_seed_a, truth);
  const auto off = train_single<double>(cfg.arch, cfg.optim, s1, seeds.init_seed_a);
  WindowedStream s2(cfg.stream, seeds.data_seed, seeds.shuffle_seed_a, truth);
  TrainOptions opts;
  opts.emul_seed = seeds.emul_seed_a;
  const auto on = train_single<double>(cfg.arch, cfg.optim, s2, seeds.init_seed_a, opts);

  const auto f_off = flatten_parameters(off);
  const auto f_on = flatten_parameters(on);
  double max_delta = 0.0;
  for (std::size_t i = 0; i < f_off.size(); ++i) {
    max_delta = std::max(max_delta, std::abs(f_off[i] - f_on[i]));
  }
  REQUIRE(max_delta <= 1e-6);
}

TEST_CASE("distinct initialization is recorded in the pair report") {
  auto cfg = small_cfg();
  cfg.init_mode = InitMode::distinct;
  const GroundTruth truth = experiment_truth(cfg);
  const auto outcome = train_pair(cfg, truth, 0);
  REQUIRE(outcome.report.init_seed_a != outcome.report.init_seed_b);
  REQUIRE(outcome.report.excess_loss_a >= 0.0);
  REQUIRE(outcome.report.excess_loss_b >= 0.0);
  REQUIRE(outcome.report.relative_pd > 0.0);
}

TEST_CASE("single-pair experiments aggregate to the pair itself") {
  const auto cfg = small_cfg();
  const auto res = run_experiment(cfg);
  REQUIRE(res.aggregate.completed_pairs == 1);
  REQUIRE(res.aggregate.mean_pd == res.pairs[0].report.relative_pd);
  REQUIRE(res.aggregate.se_pd == 0.0);
  REQUIRE(res.aggregate.mean_loss ==
          0.5 * (res.pairs[0].report.excess_loss_a + res.pairs[0].report.excess_loss_b));
}

TEST_CASE("aggregate PD is the mean of per-pair PDs") {
  auto cfg = small_cfg();
  cfg.pair_count = 4;
  cfg.init_mode = InitMode::distinct;
  const auto res = run_experiment(cfg);
  double mean = 0.0;
  for (const auto& p : res.pairs) mean += p.report.relative_pd;
  mean /= 4.0;
  REQUIRE(res.aggregate.mean_pd == Approx(mean).margin(1e-18));
}

TEST_CASE("experiments are reproducible and thread-count independent") {
  auto cfg = small_cfg();
  cfg.pair_count = 3;
  cfg.init_mode = InitMode::distinct;
  const auto r1 = run_experiment(cfg, 1);
  const auto r2 = run_experiment(cfg, 3);
  REQUIRE(r1.aggregate.mean_pd == r2.aggregate.mean_pd);
  REQUIRE(r1.aggregate.mean_loss == r2.aggregate.mean_loss);
  for (int k = 0; k < 3; ++k) {
    REQUIRE(r1.pairs[k].report.relative_pd == r2.pairs[k].report.relative_pd);
    REQUIRE(r1.pairs[k].report.excess_loss_a == r2.pairs[k].report.excess_loss_a);
  }
}

TEST_CASE("convex recovery at reduced scale") {
  auto cfg = small_cfg();
  cfg.arch = {ArchKind::linear};
  cfg.stream.total_examples = 1u << 18;
  cfg.eval_size = 1u << 12;
  const auto res = run_experiment(cfg);
  REQUIRE(res.aggregate.mean_loss <= 0.02);
}

TEST_CASE("warm start with unit ratio and z=1 stays bit-identical") {
  auto cfg = small_cfg();
  cfg.warm.enabled = true;
  cfg.warm.lr_ratio = 1.0;
  const auto res = run_experiment(cfg, 1, true);
  REQUIRE(res.aggregate.completed_pairs == 1);
  REQUIRE(res.pairs[0].report.relative_pd == 0.0);
  REQUIRE(res.pairs[0].checkpoint_a == res.pairs[0].checkpoint_b);
  REQUIRE(!res.teacher_params.empty());
}

TEST_CASE("warm_start_pair rejects a mismatched teacher") {
  const auto cfg = small_cfg();
  const auto net = build_network<double>({ArchKind::single_hidden, {ActKind::relu}}, 1);
  const auto path = std::filesystem::temp_directory_path() / "pdlab_teacher_mismatch.ckpt";
  save_checkpoint(net, path.string());
  REQUIRE_THROWS_AS(warm_start_pair(cfg, path.string()), std::invalid_argument);
  std::filesystem::remove(path);
}

TEST_CASE("warm_start_pair accepts a matching teacher checkpoint") {
  auto cfg = small_cfg();
  cfg.stream.total_examples = 1u << 10;
  const auto net = build_network<double>(cfg.arch, 123);
  const auto path = std::filesystem::temp_directory_path() / "pdlab_teacher_ok.ckpt";
  save_checkpoint(net, path.string());
  const auto report = warm_start_pair(cfg, path.string());
  REQUIRE(report.relative_pd == 0.0);  // identical init by construction at z=1
  std::filesystem::remove(path);
}

TEST_CASE("variant labels follow the activation + unit count convention") {
  ExperimentConfig cfg = small_cfg();
  cfg.arch = {ArchKind::linear};
  REQUIRE(variant_label(cfg) == "linear");
  cfg.arch = {ArchKind::single_hidden, {ActKind::identity}};
  REQUIRE(variant_label(cfg) == "identity1");
  cfg.arch = {ArchKind::double_hidden, {ActKind::relu}};
  cfg.init_mode = InitMode::distinct;
  REQUIRE(variant_label(cfg) == "relu2 diff");
  cfg.init_mode = InitMode::identical;
  cfg.arch = {ArchKind::wide_embedding, {ActKind::swish, 1.0}};
  REQUIRE(variant_label(cfg) == "swish1000 b=1");
  cfg.arch = {ArchKind::quad_tower, {ActKind::smelu, 0.5}, {256, 128}};
  cfg.warm.enabled = true;
  REQUIRE(variant_label(cfg) == "smelu[256-128] b=0.5 TL");
}

TEST_CASE("sweep emits rows in ascending z order per variant") {
  auto cfg = small_cfg();
  cfg.stream.total_examples = 1u << 10;
  cfg.eval_size = 128;
  SweepVariant v1{"linear", cfg};
  v1.config.arch = {ArchKind::linear};
  SweepVariant v2{"relu2", cfg};
  const auto report = sweep({v1, v2}, {4, 0, 2});
  REQUIRE(report.rows.size() == 6);
  REQUIRE(report.rows[0].variant == "linear");
  REQUIRE(report.rows[0].log2_z == 0);
  REQUIRE(report.rows[1].log2_z == 2);
  REQUIRE(report.rows[2].log2_z == 4);
  REQUIRE(report.rows[3].variant == "relu2");
  REQUIRE(report.pair_entries.size() == 6);
  REQUIRE_THROWS_AS(sweep({v1}, {}), std::invalid_argument);
}

TEST_CASE("float32 precision mode trains and keeps the null control") {
  auto cfg = small_cfg();
  cfg.precision = Precision::f32;
  cfg.stream.total_examples = 1u << 10;
  const auto res = run_experiment(cfg, 1, true);
  REQUIRE(res.aggregate.completed_pairs == 1);
  REQUIRE(res.pairs[0].report.relative_pd == 0.0);
  REQUIRE(res.pairs[0].checkpoint_a == res.pairs[0].checkpoint_b);
}

TEST_CASE("linear pairs report a diff cosine, deep pairs do not") {
  auto cfg = small_cfg();
  cfg.arch = {ArchKind::linear};
  cfg.init_mode = InitMode::distinct;
  const GroundTruth truth = experiment_truth(cfg);
  const auto lin = train_pair(cfg, truth, 0);
  REQUIRE(lin.report.diff_cosine.has_value());
  REQUIRE(*lin.report.diff_cosine >= -1.0);
  REQUIRE(*lin.report.diff_cosine <= 1.0);

  cfg.arch = {ArchKind::double_hidden, {ActKind::relu}};
  const auto deep = train_pair(cfg, truth, 0);
  REQUIRE(!deep.report.diff_cosine.has_value());
}
