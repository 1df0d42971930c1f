#pragma once
// Flat key/value experiment configuration: dotted section prefixes, strict
// key validation, canonical emission (so configs diff cleanly and hash
// stably).

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pdlab/harness.hpp"

namespace pdlab {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return std::string(s.substr(a, b - a + 1));
}

// Shortest decimal that parses back to exactly the same double.
inline std::string fmt_double(double v) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline double parse_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0') {
    throw ConfigError(key + ": expected a number, got '" + value + "'");
  }
  return v;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  if (value.empty() || value[0] == '-') {
    throw ConfigError(key + ": expected a nonnegative integer, got '" + value + "'");
  }
  char* end = nullptr;
  const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0') {
    throw ConfigError(key + ": expected an integer, got '" + value + "'");
  }
  return v;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw ConfigError(key + ": expected true or false, got '" + value + "'");
}

inline std::vector<int> parse_widths(const std::string& key, const std::string& value) {
  std::vector<int> widths;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError(key + ": empty width entry");
    const auto v = parse_u64(key, item);
    if (v == 0 || v > 65535) throw ConfigError(key + ": width out of range: " + item);
    widths.push_back(static_cast<int>(v));
  }
  if (widths.empty()) throw ConfigError(key + ": expected a comma-separated width list");
  return widths;
}

}  // namespace detail

struct KvEntry {
  std::string key;
  std::string value;
  int line = 0;
};

// Syntax pass: '#' comments, blank lines, "key = value" records.
inline std::vector<KvEntry> read_kv(const std::string& text) {
  std::vector<KvEntry> entries;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = detail::trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    KvEntry e;
    e.key = detail::trim(stripped.substr(0, eq));
    e.value = detail::trim(stripped.substr(eq + 1));
    e.line = lineno;
    if (e.key.empty()) {
      throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

// Semantic pass: route keys, validate values, apply defaults.
inline ExperimentConfig config_from_kv(const std::vector<KvEntry>& entries) {
  ExperimentConfig cfg;
  bool beta_seen = false;
  bool widths_seen = false;
  bool acc_seen = false, momentum_seen = false, decay_seen = false;
  std::vector<std::string> seen;

  for (const auto& e : entries) {
    for (const auto& prev : seen) {
      if (prev == e.key) {
        throw ConfigError("line " + std::to_string(e.line) + ": duplicate key '" +
                          e.key + "'");
      }
    }
    seen.push_back(e.key);
    const std::string& k = e.key;
    const std::string& v = e.value;
    try {
      if (k == "data.truth") {
        if (v == "linear") {
          cfg.truth_kind = TruthKind::linear;
        } else if (v == "quadratic") {
          cfg.truth_kind = TruthKind::quadratic;
        } else {
          throw ConfigError(k + ": expected linear or quadratic, got '" + v + "'");
        }
      } else if (k == "model.arch") {
        cfg.arch.kind = arch_from_name(v);
      } else if (k == "model.activation") {
        cfg.arch.activation.kind = act_from_name(v);
      } else if (k == "model.beta") {
        cfg.arch.activation.beta = detail::parse_double(k, v);
        beta_seen = true;
      } else if (k == "model.widths") {
        cfg.arch.widths = detail::parse_widths(k, v);
        widths_seen = true;
      } else if (k == "model.precision") {
        if (v == "f64") {
          cfg.precision = Precision::f64;
        } else if (v == "f32") {
          cfg.precision = Precision::f32;
        } else {
          throw ConfigError(k + ": expected f64 or f32, got '" + v + "'");
        }
      } else if (k == "optim.kind") {
        if (v == "adagrad") {
          cfg.optim.kind = OptKind::adagrad;
        } else if (v == "sgd") {
          cfg.optim.kind = OptKind::sgd_momentum;
        } else {
          throw ConfigError(k + ": expected adagrad or sgd, got '" + v + "'");
        }
      } else if (k == "optim.lr") {
        cfg.optim.lr = detail::parse_double(k, v);
      } else if (k == "optim.acc_init") {
        cfg.optim.acc_init = detail::parse_double(k, v);
        acc_seen = true;
      } else if (k == "optim.momentum") {
        cfg.optim.momentum = detail::parse_double(k, v);
        momentum_seen = true;
      } else if (k == "optim.decay") {
        cfg.optim.decay = detail::parse_double(k, v);
        decay_seen = true;
      } else if (k == "stream.T") {
        cfg.stream.total_examples = detail::parse_u64(k, v);
        if (cfg.stream.total_examples == 0) throw ConfigError(k + ": must be positive");
      } else if (k == "stream.s") {
        const auto s = detail::parse_u64(k, v);
        if (s == 0 || s > (1u << 20)) throw ConfigError(k + ": out of range");
        cfg.stream.batch_size = static_cast<int>(s);
      } else if (k == "stream.log2_z") {
        const auto lz = detail::parse_u64(k, v);
        if (lz > 24) throw ConfigError(k + ": must be in 0..24");
        cfg.stream.window_batches = 1 << static_cast<int>(lz);
      } else if (k == "stream.master_seed") {
        cfg.stream.master_seed = detail::parse_u64(k, v);
      } else if (k == "harness.pairs") {
        const auto p = detail::parse_u64(k, v);
        if (p == 0 || p > 4096) throw ConfigError(k + ": out of range");
        cfg.pair_count = static_cast<int>(p);
      } else if (k == "harness.init") {
        if (v == "identical") {
          cfg.init_mode = InitMode::identical;
        } else if (v == "distinct") {
          cfg.init_mode = InitMode::distinct;
        } else {
          throw ConfigError(k + ": expected identical or distinct, got '" + v + "'");
        }
      } else if (k == "harness.eval_size") {
        const auto n = detail::parse_u64(k, v);
        if (n == 0) throw ConfigError(k + ": must be positive");
        cfg.eval_size = static_cast<std::size_t>(n);
      } else if (k == "harness.emulate") {
        cfg.emulate_batch_order = detail::parse_bool(k, v);
      } else if (k == "harness.warm_start") {
        cfg.warm.enabled = true;
        cfg.warm.teacher_checkpoint = v;
      } else if (k == "harness.warm_lr_ratio") {
        cfg.warm.enabled = true;
        cfg.warm.lr_ratio = detail::parse_double(k, v);
      } else {
        throw ConfigError("line " + std::to_string(e.line) + ": unknown key '" + k + "'");
      }
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(k + ": " + ex.what());
    }
  }

  if (activation_needs_beta(cfg.arch.activation.kind) && !beta_seen) {
    throw ConfigError("model.beta: required for activation '" +
                      std::string(act_name(cfg.arch.activation.kind)) + "'");
  }
  if (widths_seen && cfg.arch.kind != ArchKind::tower &&
      cfg.arch.kind != ArchKind::quad_tower) {
    throw ConfigError("model.widths: only valid for tower architectures");
  }
  if (cfg.optim.kind == OptKind::sgd_momentum && acc_seen) {
    throw ConfigError("optim.acc_init: only valid for adagrad");
  }
  if (cfg.optim.kind == OptKind::adagrad && (momentum_seen || decay_seen)) {
    throw ConfigError("optim.momentum/optim.decay: only valid for sgd");
  }
  cfg.validate();
  return cfg;
}

inline ExperimentConfig parse_config(const std::string& text) {
  return config_from_kv(read_kv(text));
}

inline int log2_of_window(const StreamConfig& s) {
  int lz = 0;
  while ((1 << lz) < s.window_batches) ++lz;
  return lz;
}

// Canonical emission: fixed key order, every effective field present,
// optional fields only when meaningful.
inline std::string emit_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "data.truth = " << truth_name(cfg.truth_kind) << "\n";
  out << "model.arch = " << arch_name(cfg.arch.kind) << "\n";
  out << "model.activation = " << act_name(cfg.arch.activation.kind) << "\n";
  if (activation_needs_beta(cfg.arch.activation.kind)) {
    out << "model.beta = " << detail::fmt_double(cfg.arch.activation.beta) << "\n";
  }
  if ((cfg.arch.kind == ArchKind::tower || cfg.arch.kind == ArchKind::quad_tower) &&
      !cfg.arch.widths.empty()) {
    out << "model.widths = ";
    for (std::size_t i = 0; i < cfg.arch.widths.size(); ++i) {
      if (i > 0) out << ",";
      out << cfg.arch.widths[i];
    }
    out << "\n";
  }
  out << "model.precision = " << (cfg.precision == Precision::f32 ? "f32" : "f64")
      << "\n";
  out << "optim.kind = " << opt_name(cfg.optim.kind) << "\n";
  out << "optim.lr = " << detail::fmt_double(cfg.optim.lr) << "\n";
  if (cfg.optim.kind == OptKind::adagrad) {
    out << "optim.acc_init = " << detail::fmt_double(cfg.optim.acc_init) << "\n";
  } else {
    out << "optim.momentum = " << detail::fmt_double(cfg.optim.momentum) << "\n";
    out << "optim.decay = " << detail::fmt_double(cfg.optim.decay) << "\n";
  }
  out << "stream.T = " << cfg.stream.total_examples << "\n";
  out << "stream.s = " << cfg.stream.batch_size << "\n";
  out << "stream.log2_z = " << log2_of_window(cfg.stream) << "\n";
  out << "stream.master_seed = " << cfg.stream.master_seed << "\n";
  out << "harness.pairs = " << cfg.pair_count << "\n";
  out << "harness.init = " << init_mode_name(cfg.init_mode) << "\n";
  out << "harness.eval_size = " << cfg.eval_size << "\n";
  out << "harness.emulate = " << (cfg.emulate_batch_order ? "true" : "false") << "\n";
  if (cfg.warm.enabled) {
    if (!cfg.warm.teacher_checkpoint.empty()) {
      out << "harness.warm_start = " << cfg.warm.teacher_checkpoint << "\n";
    }
    out << "harness.warm_lr_ratio = " << detail::fmt_double(cfg.warm.lr_ratio) << "\n";
  }
  return out.str();
}

inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (const char c : text) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}

inline std::string hash_hex12(std::string_view text) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(text)));
  return std::string(buf).substr(0, 12);
}

}  // namespace pdlab
