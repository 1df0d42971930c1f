#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "pdlab/report.hpp"
#include "pdlab/svg.hpp"

using namespace pdlab;

namespace {

int count_occurrences(const std::string& haystack, const std::string& needle) {
  int n = 0;
  for (std::size_t pos = haystack.find(needle); pos != std::string::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

int count_lines(const std::string& s) {
  return count_occurrences(s, "\n");
}

SweepReport small_report(const SweepVariant& variant) {
  SweepReport r;
  r.variants.push_back(variant);
  r.rows.push_back({variant.label, 0, 1.5e-6, 2e-7, 0.01, 0.001});
  r.rows.push_back({variant.label, 10, 3.25e-4, 1e-5, 0.0101, 0.001});
  PairReport pr;
  pr.pair_index = 0;
  pr.excess_loss_a = 0.0123456789123;
  pr.excess_loss_b = 0.0124;
  pr.relative_pd = 4.5e-5;
  pr.diff_cosine = 0.191;
  r.pair_entries.push_back({0, 0, pr});
  return r;
}

}  // namespace

TEST_CASE("pairs.csv carries the pinned header and one row per pair") {
  SweepVariant variant{"linear", ExperimentConfig{}};
  const auto report = small_report(variant);
  const std::string csv = pairs_csv(report);
  REQUIRE(csv.rfind("pair_index,log2_z,init_mode,activation,arch,optimizer,"
                    "excess_loss_a,excess_loss_b,relative_pd,diff_cosine\n",
                    0) == 0);
  REQUIRE(count_lines(csv) == 2);  // header + one pair
  REQUIRE(csv.find("0.01234567891") != std::string::npos);  // 10 significant digits
  REQUIRE(csv.find("0.191") != std::string::npos);
  REQUIRE(pairs_csv(report) == csv);  // byte-stable
}

TEST_CASE("missing diff cosine renders as an empty field") {
  SweepReport r;
  r.variants.push_back({"relu2", ExperimentConfig{}});
  PairReport pr;
  pr.pair_index = 3;
  pr.relative_pd = 0.5;
  r.pair_entries.push_back({0, 4, pr});
  const std::string csv = pairs_csv(r);
  REQUIRE(csv.find(",0.5,\n") != std::string::npos);
}

TEST_CASE("sweep.csv header, rows and round-trip parse") {
  SweepVariant variant{"identity2 diff", ExperimentConfig{}};
  const auto report = small_report(variant);
  const std::string csv = sweep_csv(report);
  REQUIRE(csv.rfind("variant,log2_z,mean_pd,se_pd,mean_loss,se_loss\n", 0) == 0);
  REQUIRE(count_lines(csv) == 3);
  const auto rows = parse_sweep_csv(csv);
  REQUIRE(rows.size() == 2);
  REQUIRE(rows[0].variant == "identity2 diff");
  REQUIRE(rows[0].log2_z == 0);
  REQUIRE(rows[0].mean_pd == 1.5e-6);
  REQUIRE(rows[1].log2_z == 10);
  REQUIRE(rows[1].mean_loss == 0.0101);
  REQUIRE_THROWS(parse_sweep_csv("bad,header\n1,2\n"));
}

TEST_CASE("weights csv header") {
  const std::vector<WeightRow> rows = {{"w0", 0, 1.0, 2.0}, {"b0", 0, -1.0, -1.0}};
  const std::string csv = weights_csv(rows);
  REQUIRE(csv.rfind("layer_id,param_index,value_a,value_b\n", 0) == 0);
  REQUIRE(count_lines(csv) == 3);
}

TEST_CASE("manifest text carries schema version and pair statuses") {
  RunManifest m;
  m.config_hash = "abc";
  m.master_seed = 7;
  m.tool_version = "pdlab test";
  m.started_at = "2026-01-01T00:00:00Z";
  m.finished_at = "2026-01-01T00:01:00Z";
  m.pairs.push_back({"linear", 0, 0, true, false, ""});
  m.pairs.push_back({"linear", 0, 1, true, true, ""});
  m.pairs.push_back({"linear", 0, 2, false, false, "exploded"});
  m.notes.push_back("a note");
  const std::string text = manifest_text(m);
  REQUIRE(text.find("schema_version = 1") != std::string::npos);
  REQUIRE(text.find("pair.linear.z0.0 = completed\n") != std::string::npos);
  REQUIRE(text.find("pair.linear.z0.1 = completed stuck\n") != std::string::npos);
  REQUIRE(text.find("pair.linear.z0.2 = failed: exploded\n") != std::string::npos);
  REQUIRE(text.find("note = a note") != std::string::npos);
}

TEST_CASE("single-point series renders a valid svg with one marker") {
  FigureSeries s;
  s.label = "relu2";
  s.points.push_back({0.0, 3e-4, ""});
  const std::string svg = render_pd_vs_logz({s});
  REQUIRE(svg.rfind("<svg", 0) == 0);
  REQUIRE(svg.find("</svg>") != std::string::npos);
  REQUIRE(count_occurrences(svg, "<circle") == 1);
  REQUIRE(svg.find("relu2") != std::string::npos);
}

TEST_CASE("log axis shows decade ticks across the data span") {
  FigureSeries s;
  s.label = "series";
  const double ys[] = {1e-7, 1e-5, 4e-3, 1e-2};
  for (int i = 0; i < 4; ++i) s.points.push_back({double(i), ys[i], ""});
  const std::string svg = render_pd_vs_logz({s});
  for (const char* tick : {"1e-7", "1e-6", "1e-5", "1e-4", "1e-3", "1e-2"}) {
    REQUIRE(svg.find(std::string(">") + tick + "<") != std::string::npos);
  }
}

TEST_CASE("pd-vs-loss figure annotates points with log2 z") {
  FigureSeries s;
  s.label = "swish1000";
  s.points.push_back({0.011, 1e-5, "0"});
  s.points.push_back({0.012, 1e-4, "10"});
  s.points.push_back({0.0115, 2e-3, "20"});
  const std::string svg = render_pd_vs_loss({s});
  REQUIRE(svg.find(">20<") != std::string::npos);
  REQUIRE(count_occurrences(svg, "<circle") == 3);
}

TEST_CASE("svg rendering is byte-deterministic and zero-safe") {
  FigureSeries s;
  s.label = "null control";
  s.points.push_back({0.0, 0.0, ""});
  s.points.push_back({6.0, 1e-6, ""});
  const std::string a = render_pd_vs_logz({s});
  const std::string b = render_pd_vs_logz({s});
  REQUIRE(a == b);
  REQUIRE(a.find("nan") == std::string::npos);
  REQUIRE(a.find("inf") == std::string::npos);
}
