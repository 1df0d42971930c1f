#pragma once
// CSV emission and the run manifest. All numeric CSV fields use 10
// significant digits; rows are newline-terminated; output is byte-stable for
// a fixed (config, seed).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pdlab/config.hpp"
#include "pdlab/harness.hpp"
#include "pdlab/metrics.hpp"

namespace pdlab {

inline constexpr int kReportSchemaVersion = 1;

inline std::string fmt_sig10(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline constexpr const char* kPairsCsvHeader =
    "pair_index,log2_z,init_mode,activation,arch,optimizer,excess_loss_a,"
    "excess_loss_b,relative_pd,diff_cosine";

inline constexpr const char* kSweepCsvHeader =
    "variant,log2_z,mean_pd,se_pd,mean_loss,se_loss";

inline constexpr const char* kWeightsCsvHeader =
    "layer_id,param_index,value_a,value_b";

inline std::string optimizer_summary(const OptimizerConfig& o) {
  std::string s = opt_name(o.kind);
  s += ":lr=";
  s += detail::fmt_double(o.lr);
  return s;
}

inline std::string pairs_csv(const SweepReport& report) {
  std::ostringstream out;
  out << kPairsCsvHeader << "\n";
  for (const auto& e : report.pair_entries) {
    const ExperimentConfig& cfg = report.variants[e.variant_index].config;
    out << e.report.pair_index << ',' << e.log2_z << ','
        << init_mode_name(cfg.init_mode) << ',' << act_name(cfg.arch.activation.kind)
        << ',' << arch_name(cfg.arch.kind) << ',' << optimizer_summary(cfg.optim) << ','
        << fmt_sig10(e.report.excess_loss_a) << ',' << fmt_sig10(e.report.excess_loss_b)
        << ',' << fmt_sig10(e.report.relative_pd) << ',';
    if (e.report.diff_cosine.has_value()) out << fmt_sig10(*e.report.diff_cosine);
    out << "\n";
  }
  return out.str();
}

inline std::string sweep_csv(const SweepReport& report) {
  std::ostringstream out;
  out << kSweepCsvHeader << "\n";
  for (const auto& r : report.rows) {
    out << r.variant << ',' << r.log2_z << ',' << fmt_sig10(r.mean_pd) << ','
        << fmt_sig10(r.se_pd) << ',' << fmt_sig10(r.mean_loss) << ','
        << fmt_sig10(r.se_loss) << "\n";
  }
  return out.str();
}

inline std::string weights_csv(const std::vector<WeightRow>& rows) {
  std::ostringstream out;
  out << kWeightsCsvHeader << "\n";
  for (const auto& r : rows) {
    out << r.layer_id << ',' << r.param_index << ',' << fmt_sig10(r.value_a) << ','
        << fmt_sig10(r.value_b) << "\n";
  }
  return out.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct ManifestPairStatus {
  std::string variant;
  int log2_z = 0;
  int pair_index = 0;
  bool completed = false;
  bool stuck = false;
  std::string error;
};

struct RunManifest {
  std::string config_hash;
  std::uint64_t master_seed = 0;
  std::string tool_version;
  std::string started_at;
  std::string finished_at;
  std::vector<ManifestPairStatus> pairs;
  std::vector<std::string> notes;
};

inline std::string manifest_text(const RunManifest& m) {
  std::ostringstream out;
  out << "schema_version = " << kReportSchemaVersion << "\n";
  out << "tool_version = " << m.tool_version << "\n";
  out << "config_hash = " << m.config_hash << "\n";
  out << "master_seed = " << m.master_seed << "\n";
  out << "started_at = " << m.started_at << "\n";
  out << "finished_at = " << m.finished_at << "\n";
  for (const auto& p : m.pairs) {
    out << "pair." << p.variant << ".z" << p.log2_z << "." << p.pair_index << " = ";
    if (!p.completed) {
      out << "failed: " << p.error;
    } else {
      out << (p.stuck ? "completed stuck" : "completed");
    }
    out << "\n";
  }
  for (const auto& n : m.notes) {
    out << "note = " << n << "\n";
  }
  return out.str();
}

// Minimal CSV split; report files never contain quoted fields.
inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (const char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

// Parses sweep.csv back into rows (used by the plot command).
inline std::vector<SweepRow> parse_sweep_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line).size() != 6) {
    throw std::runtime_error("sweep.csv: missing or malformed header");
  }
  std::vector<SweepRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 6) {
      throw std::runtime_error("sweep.csv line " + std::to_string(lineno) +
                               ": expected 6 fields");
    }
    SweepRow r;
    r.variant = f[0];
    r.log2_z = static_cast<int>(detail::parse_u64("log2_z", f[1]));
    r.mean_pd = detail::parse_double("mean_pd", f[2]);
    r.se_pd = detail::parse_double("se_pd", f[3]);
    r.mean_loss = detail::parse_double("mean_loss", f[4]);
    r.se_loss = detail::parse_double("se_loss", f[5]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace pdlab
