// Command-line front end: trains paired models on synthetic data and emits
// CSV reports, checkpoints and SVG figures under a run directory named by
// config hash + seed.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "pdlab/config.hpp"
#include "pdlab/harness.hpp"
#include "pdlab/report.hpp"
#include "pdlab/svg.hpp"
#include "pdlab/version.hpp"

namespace fs = std::filesystem;
using namespace pdlab;

namespace {

constexpr const char* kUsage = R"(usage: pdlab <command> [options]

commands:
  truth            sample a ground-truth model and save it to a text file
                   --kind linear|quadratic --seed N --out FILE
  run              run one experiment from a config file
                   --config FILE [--seed N] [--out DIR] [--threads N]
                   [--no-checkpoints]
  sweep            run a sweep over shuffling windows and model variants
                   --config FILE --log2z A,B,... [--variant k=v[;k=v...]]...
                   [--seed N] [--out DIR] [--threads N] [--checkpoints]
  warmstart        warm-start protocol: train (or load) a teacher, then train
                   pairs initialized from it at a reduced learning rate
                   --config FILE [--teacher CKPT] [--seed N] [--out DIR]
                   [--threads N]
  plot             render figures from an existing sweep.csv
                   --sweep FILE --out DIR
  inspect-weights  export per-parameter values of a checkpoint pair as CSV
                   --a CKPT --b CKPT [--out FILE]

The default output root is $PDLAB_OUT_ROOT, falling back to ./runs.
)";

class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

struct Flags {
  std::vector<std::pair<std::string, std::string>> values;
  std::vector<std::string> switches;

  const std::string* find(const std::string& name) const {
    for (const auto& [k, v] : values) {
      if (k == name) return &v;
    }
    return nullptr;
  }
  bool has_switch(const std::string& name) const {
    for (const auto& s : switches) {
      if (s == name) return true;
    }
    return false;
  }
  std::string require(const std::string& name) const {
    const auto* v = find(name);
    if (v == nullptr) throw UsageError("missing required flag --" + name);
    return *v;
  }
};

Flags parse_flags(int argc, char** argv, int start,
                  const std::vector<std::string>& value_flags,
                  const std::vector<std::string>& switch_flags,
                  const std::vector<std::string>& repeatable = {}) {
  Flags f;
  for (int i = start; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg.rfind("--", 0) != 0) throw UsageError("unexpected argument '" + arg + "'");
    const std::string name = arg.substr(2);
    bool is_value = false, is_switch = false, is_repeat = false;
    for (const auto& v : value_flags) is_value |= (v == name);
    for (const auto& s : switch_flags) is_switch |= (s == name);
    for (const auto& r : repeatable) is_repeat |= (r == name);
    if (is_switch) {
      f.switches.push_back(name);
      continue;
    }
    if (!is_value && !is_repeat) throw UsageError("unknown flag --" + name);
    if (i + 1 >= argc) throw UsageError("flag --" + name + " needs a value");
    if (!is_repeat && f.find(name) != nullptr) {
      throw UsageError("flag --" + name + " given twice");
    }
    f.values.emplace_back(name, argv[++i]);
  }
  return f;
}

std::string iso_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::uint64_t parse_seed(const std::string& s) {
  return detail::parse_u64("--seed", s);
}

int parse_threads(const Flags& flags) {
  const auto* t = flags.find("threads");
  if (t == nullptr) return 1;
  const auto v = detail::parse_u64("--threads", *t);
  if (v == 0 || v > 256) throw UsageError("--threads out of range");
  return static_cast<int>(v);
}

fs::path output_root(const Flags& flags) {
  if (const auto* o = flags.find("out")) return fs::path(*o);
  if (const char* env = std::getenv("PDLAB_OUT_ROOT")) return fs::path(env);
  return fs::path("runs");
}

std::vector<int> parse_log2z_list(const std::string& text) {
  std::vector<int> zs;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto v = detail::parse_u64("--log2z", detail::trim(item));
    if (v > 24) throw UsageError("--log2z entries must be in 0..24");
    zs.push_back(static_cast<int>(v));
  }
  if (zs.empty()) throw UsageError("--log2z needs at least one value");
  return zs;
}

// Applies "k=v;k=v" overrides on top of the base config's key/value entries.
std::vector<KvEntry> apply_overrides(std::vector<KvEntry> base, const std::string& spec) {
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ';')) {
    item = detail::trim(item);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw UsageError("--variant entries must look like key=value: '" + item + "'");
    }
    KvEntry e;
    e.key = detail::trim(item.substr(0, eq));
    e.value = detail::trim(item.substr(eq + 1));
    bool replaced = false;
    for (auto& existing : base) {
      if (existing.key == e.key) {
        existing.value = e.value;
        replaced = true;
        break;
      }
    }
    if (!replaced) base.push_back(e);
  }
  return base;
}

struct FigureInputs {
  std::vector<FigureSeries> pd_vs_logz;
  std::vector<FigureSeries> pd_vs_loss;
};

FigureInputs figures_from_rows(const std::vector<SweepRow>& rows) {
  FigureInputs fig;
  std::vector<std::string> order;
  for (const auto& r : rows) {
    if (std::find(order.begin(), order.end(), r.variant) == order.end()) {
      order.push_back(r.variant);
    }
  }
  for (const auto& label : order) {
    FigureSeries s1, s2;
    s1.label = label;
    s2.label = label;
    for (const auto& r : rows) {
      if (r.variant != label) continue;
      s1.points.push_back({static_cast<double>(r.log2_z), r.mean_pd, ""});
      s2.points.push_back({r.mean_loss, r.mean_pd, std::to_string(r.log2_z)});
    }
    fig.pd_vs_logz.push_back(std::move(s1));
    fig.pd_vs_loss.push_back(std::move(s2));
  }
  return fig;
}

void render_figures_from_sweep_csv(const fs::path& sweep_csv, const fs::path& out_dir) {
  const auto rows = parse_sweep_csv(read_text_file(sweep_csv));
  const auto fig = figures_from_rows(rows);
  write_text_file(out_dir / "fig_pd_vs_logz.svg", render_pd_vs_logz(fig.pd_vs_logz));
  write_text_file(out_dir / "fig_pd_vs_loss.svg", render_pd_vs_loss(fig.pd_vs_loss));
}

struct PipelineArgs {
  std::vector<SweepVariant> variants;
  std::vector<std::string> variant_strings;  // raw --variant specs, for hashing
  std::vector<int> log2_zs;
  std::uint64_t master_seed = 0;
  int threads = 1;
  bool checkpoints = false;
  std::optional<std::string> teacher_path;  // warmstart only
  bool warm = false;
};

int run_pipeline(const PipelineArgs& args, const fs::path& out_root) {
  // the run directory is named by a hash of everything that determines the
  // outputs, so distinct sweeps never clobber each other
  std::string descriptor = emit_config(args.variants.front().config);
  descriptor += "sweep.log2_z =";
  for (const int z : args.log2_zs) descriptor += " " + std::to_string(z);
  descriptor += "\n";
  for (const auto& v : args.variant_strings) {
    descriptor += "sweep.variant = " + v + "\n";
  }
  if (args.warm) {
    descriptor += "sweep.warm_teacher = " +
                  (args.teacher_path ? *args.teacher_path : std::string("trained")) +
                  "\n";
  }
  const std::string hash = hash_hex12(descriptor);
  const fs::path run_dir =
      out_root / (hash + "-s" + std::to_string(args.master_seed));
  fs::create_directories(run_dir);

  RunManifest manifest;
  manifest.config_hash = hash;
  manifest.master_seed = args.master_seed;
  manifest.tool_version = kToolVersion;
  manifest.started_at = iso_now();
  if (args.warm) {
    manifest.notes.push_back(
        "warm-start loss comparisons are not fair: teacher pre-training doubles "
        "the effective number of training examples");
  }

  bool truth_written[2] = {false, false};
  const SweepReport report = sweep(
      args.variants, args.log2_zs,
      [&](std::size_t variant_index, int lz, const ExperimentConfig& cfg) {
        const std::string& label = args.variants[variant_index].label;
        std::cerr << "[pdlab] variant=" << label << " log2z=" << lz
                  << " pairs=" << cfg.pair_count << " T=" << cfg.stream.total_examples
                  << "\n";
        ExperimentResult res = run_experiment(cfg, args.threads, args.checkpoints);
        const int kind_idx = cfg.truth_kind == TruthKind::linear ? 0 : 1;
        if (!truth_written[kind_idx]) {
          save_truth(res.truth,
                     (run_dir / (std::string("truth_") + truth_name(cfg.truth_kind) +
                                 ".txt")).string());
          truth_written[kind_idx] = true;
        }
        if (!res.teacher_params.empty() && args.warm) {
          Checkpoint ck;
          ck.spec = cfg.arch;
          ck.spec.widths = cfg.arch.hidden_widths();
          ck.precision = cfg.precision;
          ck.params = res.teacher_params;
          const auto bytes = checkpoint_to_bytes(ck);
          const fs::path p = run_dir / "teacher.ckpt";
          std::ofstream out(p, std::ios::binary);
          out.write(reinterpret_cast<const char*>(bytes.data()),
                    static_cast<std::streamsize>(bytes.size()));
        }
        for (const auto& pair : res.pairs) {
          ManifestPairStatus st;
          st.variant = label;
          st.log2_z = lz;
          st.pair_index = pair.report.pair_index;
          st.completed = pair.completed;
          st.stuck = pair.report.stuck;
          st.error = pair.error;
          manifest.pairs.push_back(st);
          if (!pair.completed) {
            std::cerr << "[pdlab] warning: pair " << pair.report.pair_index
                      << " failed: " << pair.error << "\n";
            continue;
          }
          if (args.checkpoints) {
            char name[64];
            std::snprintf(name, sizeof name, "v%zu_z%d_pair%03d", variant_index, lz,
                          pair.report.pair_index);
            for (const auto* side : {"a", "b"}) {
              const auto& bytes =
                  side[0] == 'a' ? pair.checkpoint_a : pair.checkpoint_b;
              const fs::path p = run_dir / (std::string(name) + "_" + side + ".ckpt");
              std::ofstream out(p, std::ios::binary);
              out.write(reinterpret_cast<const char*>(bytes.data()),
                        static_cast<std::streamsize>(bytes.size()));
            }
          }
        }
        std::cerr << "[pdlab]   mean_pd=" << fmt_sig10(res.aggregate.mean_pd)
                  << " mean_loss=" << fmt_sig10(res.aggregate.mean_loss)
                  << " completed=" << res.aggregate.completed_pairs << "/"
                  << cfg.pair_count << " stuck_rate=" << res.aggregate.stuck_rate
                  << "\n";
        return res;
      });

  write_text_file(run_dir / "pairs.csv", pairs_csv(report));
  write_text_file(run_dir / "sweep.csv", sweep_csv(report));
  render_figures_from_sweep_csv(run_dir / "sweep.csv", run_dir);
  manifest.finished_at = iso_now();
  write_text_file(run_dir / "manifest.txt", manifest_text(manifest));
  std::cout << run_dir.string() << "\n";
  return 0;
}

int cmd_truth(int argc, char** argv) {
  const Flags flags = parse_flags(argc, argv, 2, {"kind", "seed", "out"}, {});
  const std::string kind_s = flags.require("kind");
  TruthKind kind;
  if (kind_s == "linear") {
    kind = TruthKind::linear;
  } else if (kind_s == "quadratic") {
    kind = TruthKind::quadratic;
  } else {
    throw UsageError("--kind must be linear or quadratic");
  }
  const std::uint64_t seed = parse_seed(flags.require("seed"));
  Rng rng(derive_seed(seed, StreamTag::truth, 0));
  const GroundTruth t = sample_truth(kind, rng);
  save_truth(t, flags.require("out"));
  return 0;
}

PipelineArgs common_pipeline_args(const Flags& flags, const std::string& config_path) {
  PipelineArgs args;
  args.threads = parse_threads(flags);
  std::vector<KvEntry> base_kv = read_kv(read_text_file(config_path));
  if (const auto* seed = flags.find("seed")) {
    base_kv = apply_overrides(std::move(base_kv),
                              "stream.master_seed=" + std::to_string(parse_seed(*seed)));
  }
  for (const auto& [k, v] : flags.values) {
    if (k == "variant") {
      args.variant_strings.push_back(v);
      SweepVariant variant;
      variant.config = config_from_kv(apply_overrides(base_kv, v));
      variant.label = variant_label(variant.config);
      args.variants.push_back(std::move(variant));
    }
  }
  if (args.variants.empty()) {
    SweepVariant variant;
    variant.config = config_from_kv(base_kv);
    variant.label = variant_label(variant.config);
    args.variants.push_back(std::move(variant));
  }
  args.master_seed = args.variants.front().config.stream.master_seed;
  return args;
}

int cmd_run(int argc, char** argv) {
  const Flags flags = parse_flags(argc, argv, 2, {"config", "seed", "out", "threads"},
                                  {"no-checkpoints"});
  PipelineArgs args = common_pipeline_args(flags, flags.require("config"));
  args.checkpoints = !flags.has_switch("no-checkpoints");
  args.log2_zs = {log2_of_window(args.variants.front().config.stream)};
  return run_pipeline(args, output_root(flags));
}

int cmd_sweep(int argc, char** argv) {
  const Flags flags =
      parse_flags(argc, argv, 2, {"config", "seed", "out", "threads", "log2z"},
                  {"checkpoints"}, {"variant"});
  PipelineArgs args = common_pipeline_args(flags, flags.require("config"));
  args.checkpoints = flags.has_switch("checkpoints");
  args.log2_zs = parse_log2z_list(flags.require("log2z"));
  return run_pipeline(args, output_root(flags));
}

int cmd_warmstart(int argc, char** argv) {
  const Flags flags =
      parse_flags(argc, argv, 2, {"config", "seed", "out", "threads", "teacher"}, {});
  PipelineArgs args = common_pipeline_args(flags, flags.require("config"));
  args.warm = true;
  for (auto& v : args.variants) {
    v.config.warm.enabled = true;
    if (const auto* teacher = flags.find("teacher")) {
      v.config.warm.teacher_checkpoint = *teacher;
      args.teacher_path = *teacher;
    } else {
      v.config.warm.teacher_checkpoint.clear();  // train in-process
    }
    v.label = variant_label(v.config);
  }
  args.log2_zs = {log2_of_window(args.variants.front().config.stream)};
  return run_pipeline(args, output_root(flags));
}

int cmd_plot(int argc, char** argv) {
  const Flags flags = parse_flags(argc, argv, 2, {"sweep", "out"}, {});
  const fs::path out_dir(flags.require("out"));
  fs::create_directories(out_dir);
  render_figures_from_sweep_csv(flags.require("sweep"), out_dir);
  return 0;
}

int cmd_inspect_weights(int argc, char** argv) {
  const Flags flags = parse_flags(argc, argv, 2, {"a", "b", "out"}, {});
  const Checkpoint a = load_checkpoint(flags.require("a"));
  const Checkpoint b = load_checkpoint(flags.require("b"));
  if (!spec_compatible(a.spec, b.spec)) {
    throw std::runtime_error("checkpoints have different architectures");
  }
  const auto rows = weight_pairs_export(a.spec, a.params, b.params);
  const std::string csv = weights_csv(rows);
  if (const auto* out = flags.find("out")) {
    write_text_file(*out, csv);
  } else {
    std::cout << csv;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << kUsage;
    return 2;
  }
  const std::string cmd = argv[1];
  try {
    if (cmd == "truth") return cmd_truth(argc, argv);
    if (cmd == "run") return cmd_run(argc, argv);
    if (cmd == "sweep") return cmd_sweep(argc, argv);
    if (cmd == "warmstart") return cmd_warmstart(argc, argv);
    if (cmd == "plot") return cmd_plot(argc, argv);
    if (cmd == "inspect-weights") return cmd_inspect_weights(argc, argv);
    if (cmd == "--help" || cmd == "-h" || cmd == "help") {
      std::cout << kUsage;
      return 0;
    }
    std::cerr << "unknown subcommand '" << cmd << "'\n" << kUsage;
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n" << kUsage;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
