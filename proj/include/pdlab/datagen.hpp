#pragma once
// Synthetic ground-truth models and example sampling.
//
// Two generating models over 32 binary features: a linear log-odds model with
// long-tailed per-feature priors, and a block-quadratic model whose log-odds
// is x^T diag[L_1..L_8] x with lower-triangular 4x4 blocks. Labels are drawn
// from a Bernoulli on the sigmoid of the cumulative log-odds.

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

#include "pdlab/activation.hpp"
#include "pdlab/rng.hpp"

namespace pdlab {

inline constexpr int kNumFeatures = 32;
inline constexpr int kLinearGroupSize = 16;
inline constexpr int kQuadBlocks = 8;
inline constexpr int kQuadBlockSize = 4;

enum class TruthKind { linear, quadratic };

inline const char* truth_name(TruthKind k) {
  return k == TruthKind::linear ? "linear" : "quadratic";
}

// A training or evaluation example: 32 binary features stored one bit per
// feature, label in {-1, +1}.
struct Example {
  std::uint32_t x = 0;
  std::int8_t y = 1;

  bool active(int j) const { return (x >> j) & 1u; }
};

// Closed-form feature priors; j is the 1-based position inside a group
// (1..16 for the linear model, 1..4 within a quadratic block).
inline double feature_probability(TruthKind kind, int j) {
  constexpr double pi = std::numbers::pi;
  if (kind == TruthKind::linear) {
    if (j < 1 || j > kLinearGroupSize) {
      throw std::out_of_range("linear feature index must be in 1..16");
    }
    return 6.0 / ((j * pi) * (j * pi));
  }
  if (j < 1 || j > kQuadBlockSize) {
    throw std::out_of_range("quadratic feature index must be in 1..4");
  }
  const double jp = j * pi;
  return 90.0 / (jp * jp * jp * jp);
}

struct LinearTruth {
  std::array<double, kNumFeatures> theta{};
  std::array<double, kNumFeatures> priors{};
};

struct QuadraticTruth {
  // blocks[b][i][j]; strictly-upper entries stay identically zero.
  std::array<std::array<std::array<double, 4>, 4>, kQuadBlocks> blocks{};
  std::array<double, kQuadBlockSize> priors{};
};

struct GroundTruth {
  TruthKind kind = TruthKind::linear;
  LinearTruth linear;
  QuadraticTruth quad;

  double prior(int feature) const {
    if (kind == TruthKind::linear) return linear.priors[feature];
    return quad.priors[feature % kQuadBlockSize];
  }
};

// One draw from the equal-weight mixture of N(-2,1), N(0,1), N(2,1).
inline double sample_mixture(Rng& rng) {
  const double u = rng.uniform01();
  const double mu = u < 1.0 / 3.0 ? -2.0 : (u < 2.0 / 3.0 ? 0.0 : 2.0);
  return rng.normal(mu, 1.0);
}

inline LinearTruth sample_linear_truth(Rng& rng) {
  LinearTruth t;
  for (int j = 0; j < kNumFeatures; ++j) {
    t.theta[j] = sample_mixture(rng);
  }
  for (int j = 0; j < kNumFeatures; ++j) {
    t.priors[j] = feature_probability(TruthKind::linear, j % kLinearGroupSize + 1);
  }
  return t;
}

inline QuadraticTruth sample_quadratic_truth(Rng& rng) {
  QuadraticTruth t;
  for (int b = 0; b < kQuadBlocks; ++b) {
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j <= i; ++j) {
        t.blocks[b][i][j] = sample_mixture(rng);
      }
    }
  }
  for (int j = 0; j < kQuadBlockSize; ++j) {
    t.priors[j] = feature_probability(TruthKind::quadratic, j + 1);
  }
  return t;
}

inline GroundTruth sample_truth(TruthKind kind, Rng& rng) {
  GroundTruth t;
  t.kind = kind;
  if (kind == TruthKind::linear) {
    t.linear = sample_linear_truth(rng);
  } else {
    t.quad = sample_quadratic_truth(rng);
  }
  return t;
}

inline double true_log_odds(const GroundTruth& t, std::uint32_t x) {
  if (t.kind == TruthKind::linear) {
    double sum = 0.0;
    std::uint32_t m = x;
    while (m != 0) {
      const int j = std::countr_zero(m);
      sum += t.linear.theta[j];
      m &= m - 1;
    }
    return sum;
  }
  double sum = 0.0;
  for (int b = 0; b < kQuadBlocks; ++b) {
    const std::uint32_t nibble = (x >> (4 * b)) & 0xFu;
    if (nibble == 0) continue;
    for (int i = 0; i < 4; ++i) {
      if (((nibble >> i) & 1u) == 0) continue;
      for (int j = 0; j <= i; ++j) {
        if (((nibble >> j) & 1u) == 0) continue;
        sum += t.quad.blocks[b][i][j];
      }
    }
  }
  return sum;
}

inline double label_probability(const GroundTruth& t, std::uint32_t x, int y) {
  return sigmoid(static_cast<double>(y) * true_log_odds(t, x));
}

// Feature draw order is bit 0..31, one uniform each.
inline std::uint32_t sample_features(const GroundTruth& t, Rng& rng) {
  std::uint32_t x = 0;
  for (int j = 0; j < kNumFeatures; ++j) {
    if (rng.bernoulli(t.prior(j))) x |= (1u << j);
  }
  return x;
}

inline int sample_label(const GroundTruth& t, std::uint32_t x, Rng& rng) {
  return rng.uniform01() < label_probability(t, x, +1) ? +1 : -1;
}

inline Example sample_example(const GroundTruth& t, Rng& rng) {
  Example e;
  e.x = sample_features(t, rng);
  e.y = static_cast<std::int8_t>(sample_label(t, e.x, rng));
  return e;
}

// --- truth file I/O: one "key = value" line per parameter, 17 significant
// digits, so a truth can be pinned across runs.

namespace detail {
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace detail

inline std::string truth_to_text(const GroundTruth& t) {
  std::ostringstream out;
  out << "kind = " << truth_name(t.kind) << "\n";
  if (t.kind == TruthKind::linear) {
    for (int j = 0; j < kNumFeatures; ++j) {
      out << "theta." << j << " = " << detail::fmt17(t.linear.theta[j]) << "\n";
    }
  } else {
    for (int b = 0; b < kQuadBlocks; ++b) {
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j <= i; ++j) {
          out << "block." << b << "." << i << "." << j << " = "
              << detail::fmt17(t.quad.blocks[b][i][j]) << "\n";
        }
      }
    }
  }
  return out.str();
}

inline GroundTruth truth_from_text(const std::string& text) {
  GroundTruth t;
  bool kind_seen = false;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("truth file line " + std::to_string(lineno) +
                               ": expected 'key = value'");
    }
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key == "kind") {
      if (val == "linear") {
        t.kind = TruthKind::linear;
      } else if (val == "quadratic") {
        t.kind = TruthKind::quadratic;
      } else {
        throw std::runtime_error("truth file: unknown kind '" + val + "'");
      }
      kind_seen = true;
    } else if (key.rfind("theta.", 0) == 0) {
      const int j = std::stoi(key.substr(6));
      if (j < 0 || j >= kNumFeatures) throw std::runtime_error("truth file: bad index " + key);
      t.linear.theta[j] = std::stod(val);
    } else if (key.rfind("block.", 0) == 0) {
      int b = 0, i = 0, j = 0;
      if (std::sscanf(key.c_str(), "block.%d.%d.%d", &b, &i, &j) != 3 || b < 0 ||
          b >= kQuadBlocks || i < 0 || i > 3 || j < 0 || j > i) {
        throw std::runtime_error("truth file: bad index " + key);
      }
      t.quad.blocks[b][i][j] = std::stod(val);
    } else {
      throw std::runtime_error("truth file line " + std::to_string(lineno) +
                               ": unknown key '" + key + "'");
    }
  }
  if (!kind_seen) throw std::runtime_error("truth file: missing 'kind'");
  for (int j = 0; j < kNumFeatures; ++j) {
    t.linear.priors[j] = feature_probability(TruthKind::linear, j % kLinearGroupSize + 1);
  }
  for (int j = 0; j < kQuadBlockSize; ++j) {
    t.quad.priors[j] = feature_probability(TruthKind::quadratic, j + 1);
  }
  return t;
}

inline void save_truth(const GroundTruth& t, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << truth_to_text(t);
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

inline GroundTruth load_truth(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return truth_from_text(buf.str());
}

}  // namespace pdlab
