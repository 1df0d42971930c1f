#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "pdlab/metrics.hpp"

using namespace pdlab;
using Catch::Approx;

TEST_CASE("excess label loss of the truth itself is zero") {
  Rng rng(50);
  const GroundTruth truth = sample_truth(TruthKind::linear, rng);
  const EvalSet eval = draw_eval_set(truth, rng, 2000);
  REQUIRE(excess_label_loss(eval.p_true_pos, eval.p_true_pos) <= 1e-12);
}

TEST_CASE("hand-computed KL example") {
  const std::vector<double> p_true{0.8};
  const std::vector<double> p_model{0.5};
  REQUIRE(excess_label_loss(p_true, p_model) ==
          Approx(0.19274475702175753).epsilon(1e-10));
}

TEST_CASE("excess label loss is nonnegative") {
  Rng rng(51);
  const GroundTruth truth = sample_truth(TruthKind::quadratic, rng);
  const EvalSet eval = draw_eval_set(truth, rng, 500);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> p(eval.size());
    for (auto& v : p) v = rng.uniform01() * 0.98 + 0.01;
    REQUIRE(excess_label_loss(eval.p_true_pos, p) >= 0.0);
  }
}

TEST_CASE("excess label loss agrees with a per-example KL oracle") {
  // independent route: sum over both labels of p(y) log(p(y)/q(y))
  Rng rng(52);
  for (int model = 0; model < 100; ++model) {
    const GroundTruth truth = sample_truth(
        model % 2 == 0 ? TruthKind::linear : TruthKind::quadratic, rng);
    const EvalSet eval = draw_eval_set(truth, rng, 64);
    std::vector<double> q(eval.size());
    for (auto& v : q) v = rng.uniform01() * 0.99 + 0.005;
    double oracle = 0.0;
    for (std::size_t n = 0; n < eval.size(); ++n) {
      for (const int y : {-1, +1}) {
        const double py = label_probability(truth, eval.xs[n], y);
        const double qy = y > 0 ? q[n] : 1.0 - q[n];
        oracle += py * std::log(py / qy);
      }
    }
    oracle /= static_cast<double>(eval.size());
    REQUIRE(excess_label_loss(eval.p_true_pos, q) == Approx(oracle).margin(1e-12));
  }
}

TEST_CASE("excess label loss ignores eval permutation") {
  Rng rng(53);
  const GroundTruth truth = sample_truth(TruthKind::linear, rng);
  EvalSet eval = draw_eval_set(truth, rng, 512);
  std::vector<double> q(eval.size());
  for (auto& v : q) v = rng.uniform01() * 0.9 + 0.05;
  const double base = excess_label_loss(eval.p_true_pos, q);

  std::vector<std::size_t> order(eval.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  shuffle_in_place(order, rng);
  EvalSet permuted;
  std::vector<double> qp;
  for (const auto i : order) {
    permuted.xs.push_back(eval.xs[i]);
    permuted.p_true_pos.push_back(eval.p_true_pos[i]);
    qp.push_back(q[i]);
  }
  REQUIRE(excess_label_loss(permuted.p_true_pos, qp) == Approx(base).margin(1e-12));
}

TEST_CASE("relative PD basics") {
  const std::vector<double> p_true{0.5};
  SECTION("identical predictions give zero") {
    const std::vector<double> p{0.61};
    REQUIRE(relative_pd(p_true, p, p) == 0.0);
  }
  SECTION("hand evaluation") {
    REQUIRE(relative_pd(p_true, std::vector<double>{0.6}, std::vector<double>{0.5}) ==
            Approx(0.2).epsilon(1e-12));
  }
  SECTION("swapping the pair members changes nothing") {
    Rng rng(54);
    std::vector<double> t(64), a(64), b(64);
    for (std::size_t i = 0; i < 64; ++i) {
      t[i] = rng.uniform01() * 0.9 + 0.05;
      a[i] = rng.uniform01();
      b[i] = rng.uniform01();
    }
    REQUIRE(relative_pd(t, a, b) == Approx(relative_pd(t, b, a)).margin(1e-15));
    REQUIRE(relative_pd(t, a, b) >= 0.0);
  }
}

TEST_CASE("aggregated PD equals the mean of per-pair PDs") {
  // Eq-style direct evaluation with M = 4 models (2 pairs) against the
  // per-pair computation averaged by hand.
  Rng rng(55);
  const std::size_t n = 128;
  std::vector<double> t(n);
  std::vector<std::vector<double>> preds(4, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = rng.uniform01() * 0.9 + 0.05;
    for (auto& m : preds) m[i] = rng.uniform01();
  }
  double direct = 0.0;
  const int M = 4;
  for (std::size_t i = 0; i < n; ++i) {
    double pair_sum = 0.0;
    for (int k = 1; k <= M / 2; ++k) {
      pair_sum += std::abs(preds[2 * k - 1][i] - preds[2 * k - 2][i]) / t[i];
    }
    direct += (2.0 / M) * pair_sum;
  }
  direct /= static_cast<double>(n);
  const double by_pairs =
      0.5 * (relative_pd(t, preds[0], preds[1]) + relative_pd(t, preds[2], preds[3]));
  REQUIRE(by_pairs == Approx(direct).margin(1e-12));
}

TEST_CASE("diff cosine") {
  const std::vector<double> theta{1.0, 2.0, 3.0};
  SECTION("equal deviations give +1") {
    const std::vector<double> w{1.5, 2.5, 3.5};
    REQUIRE(diff_cosine(w, w, theta).value() == Approx(1.0).epsilon(1e-12));
  }
  SECTION("antipodal deviations give -1") {
    const std::vector<double> wa{1.5, 2.5, 3.5};
    const std::vector<double> wb{0.5, 1.5, 2.5};
    REQUIRE(diff_cosine(wa, wb, theta).value() == Approx(-1.0).epsilon(1e-12));
  }
  SECTION("zero deviation is reported missing") {
    REQUIRE(!diff_cosine(theta, std::vector<double>{9.0, 9.0, 9.0}, theta).has_value());
  }
  SECTION("length mismatch throws") {
    REQUIRE_THROWS_AS(diff_cosine(std::vector<double>{1.0}, theta, theta),
                      std::invalid_argument);
  }
}

TEST_CASE("weight pair export") {
  const ArchitectureSpec spec{ArchKind::double_hidden, {ActKind::relu}};
  const auto a = build_network<double>(spec, 7);
  SECTION("identical networks export equal columns, one row per parameter") {
    const auto rows = weight_pairs_export(a, a);
    REQUIRE(rows.size() == parameter_count(spec));
    for (const auto& r : rows) {
      REQUIRE(r.value_a == r.value_b);
    }
  }
  SECTION("groups cover the canonical order") {
    const auto b = build_network<double>(spec, 8);
    const auto rows = weight_pairs_export(a, b);
    REQUIRE(rows.front().layer_id == "w0");
    REQUIRE(rows.back().layer_id == "b1");
    const auto fa = flatten_parameters(a);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      REQUIRE(rows[i].value_a == fa[i]);
    }
  }
  SECTION("architecture mismatch throws") {
    const auto c = build_network<double>({ArchKind::single_hidden, {ActKind::relu}}, 7);
    REQUIRE_THROWS_AS(weight_pairs_export(a, c), std::invalid_argument);
  }
}

TEST_CASE("eval sets are deterministic with true probabilities inside (0,1)") {
  Rng r1(77), r2(77);
  const GroundTruth truth = sample_truth(TruthKind::linear, r1);
  const GroundTruth truth2 = sample_truth(TruthKind::linear, r2);
  Rng e1(5), e2(5);
  const EvalSet a = draw_eval_set(truth, e1, 256);
  const EvalSet b = draw_eval_set(truth2, e2, 256);
  REQUIRE(a.xs == b.xs);
  REQUIRE(a.p_true_pos == b.p_true_pos);
  for (const double p : a.p_true_pos) {
    REQUIRE(p > 0.0);
    REQUIRE(p < 1.0);
  }
}
