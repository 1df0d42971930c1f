#pragma once
// Feed-forward binary classifiers over the 32 binary inputs, with exact
// backpropagation under logistic loss.
//
// Supported shapes: the convex linear baseline, single/double hidden unit
// networks, narrow deep towers, the two-table embedding model (per-set
// embedding sums concatenated into a 4-dim input), and the wide tower used
// with quadratic data. The input layer stores its weights column-major so
// sparse binary inputs touch only active columns; hidden layers are
// row-major.

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdlab/activation.hpp"
#include "pdlab/datagen.hpp"
#include "pdlab/rng.hpp"

namespace pdlab {

enum class ArchKind {
  linear,
  single_hidden,
  double_hidden,
  tower,
  wide_embedding,
  quad_tower,
};

inline const char* arch_name(ArchKind k) {
  switch (k) {
    case ArchKind::linear: return "linear";
    case ArchKind::single_hidden: return "single_hidden";
    case ArchKind::double_hidden: return "double_hidden";
    case ArchKind::tower: return "tower";
    case ArchKind::wide_embedding: return "wide_embedding";
    case ArchKind::quad_tower: return "quad_tower";
  }
  return "linear";
}

inline ArchKind arch_from_name(std::string_view name) {
  if (name == "linear") return ArchKind::linear;
  if (name == "single_hidden") return ArchKind::single_hidden;
  if (name == "double_hidden") return ArchKind::double_hidden;
  if (name == "tower") return ArchKind::tower;
  if (name == "wide_embedding") return ArchKind::wide_embedding;
  if (name == "quad_tower") return ArchKind::quad_tower;
  throw std::invalid_argument("unknown architecture '" + std::string(name) + "'");
}

inline constexpr int kEmbeddingDim = 2;
inline constexpr int kEmbeddingTableRows = 16;

struct ArchitectureSpec {
  ArchKind kind = ArchKind::linear;
  Activation activation{};
  std::vector<int> widths{};  // hidden widths; empty selects the default

  bool has_embeddings() const { return kind == ArchKind::wide_embedding; }

  int input_dim() const {
    return has_embeddings() ? 2 * kEmbeddingDim : kNumFeatures;
  }

  std::vector<int> hidden_widths() const {
    switch (kind) {
      case ArchKind::linear: return {};
      case ArchKind::single_hidden: return {1};
      case ArchKind::double_hidden: return {2};
      case ArchKind::tower:
        return widths.empty() ? std::vector<int>{16, 8, 4, 2} : widths;
      case ArchKind::wide_embedding:
        return widths.empty() ? std::vector<int>{1000} : widths;
      case ArchKind::quad_tower:
        return widths.empty() ? std::vector<int>{1024, 512} : widths;
    }
    return {};
  }

  void validate() const {
    for (int w : hidden_widths()) {
      if (w <= 0) throw std::invalid_argument("hidden widths must be positive");
    }
    if (activation_needs_beta(activation.kind) && !(activation.beta > 0.0)) {
      throw std::invalid_argument("activation beta must be positive");
    }
  }
};

inline std::size_t parameter_count(const ArchitectureSpec& spec) {
  std::size_t n = spec.has_embeddings()
                      ? std::size_t(2) * kEmbeddingTableRows * kEmbeddingDim
                      : 0;
  int in = spec.input_dim();
  for (int w : spec.hidden_widths()) {
    n += std::size_t(in) * w + w;
    in = w;
  }
  n += std::size_t(in) + 1;  // scalar logit layer
  return n;
}

template <class Real>
struct DenseLayer {
  int in = 0;
  int out = 0;
  bool col_major = false;  // w[j*out + i] when true, w[i*in + j] otherwise
  std::vector<Real> w;
  std::vector<Real> b;
};

template <class Real>
struct Network {
  ArchitectureSpec spec;
  std::array<std::vector<Real>, 2> embeddings{};  // row-major 16 x 2 tables
  std::vector<DenseLayer<Real>> layers;

  std::size_t parameter_count() const { return pdlab::parameter_count(spec); }

  bool finite() const {
    auto ok = [](const std::vector<Real>& v) {
      for (Real x : v) {
        if (!std::isfinite(static_cast<double>(x))) return false;
      }
      return true;
    };
    for (const auto& t : embeddings) {
      if (!ok(t)) return false;
    }
    for (const auto& l : layers) {
      if (!ok(l.w) || !ok(l.b)) return false;
    }
    return true;
  }
};

template <class Real>
Network<Real> make_network_zeros(const ArchitectureSpec& spec) {
  spec.validate();
  Network<Real> net;
  net.spec = spec;
  if (spec.has_embeddings()) {
    net.embeddings[0].assign(kEmbeddingTableRows * kEmbeddingDim, Real(0));
    net.embeddings[1].assign(kEmbeddingTableRows * kEmbeddingDim, Real(0));
  }
  int in = spec.input_dim();
  const auto hidden = spec.hidden_widths();
  std::vector<int> outs(hidden);
  outs.push_back(1);
  for (std::size_t l = 0; l < outs.size(); ++l) {
    DenseLayer<Real> layer;
    layer.in = in;
    layer.out = outs[l];
    layer.col_major = (l == 0);
    layer.w.assign(std::size_t(layer.in) * layer.out, Real(0));
    layer.b.assign(layer.out, Real(0));
    net.layers.push_back(std::move(layer));
    in = outs[l];
  }
  return net;
}

// Uniform [-sqrt(6/(fan_in+fan_out)), +...] weights, zero biases. Draw order
// is embedding table 0 then 1 (row-major), then each layer's weights in
// storage order; two builds from the same seed are bit-identical.
template <class Real>
Network<Real> build_network(const ArchitectureSpec& spec, std::uint64_t init_seed) {
  auto net = make_network_zeros<Real>(spec);
  Rng rng(init_seed);
  auto draw = [&rng](double bound) {
    return static_cast<Real>((2.0 * rng.uniform01() - 1.0) * bound);
  };
  if (spec.has_embeddings()) {
    const double bound = std::sqrt(6.0 / (kEmbeddingTableRows + kEmbeddingDim));
    for (auto& table : net.embeddings) {
      for (auto& v : table) v = draw(bound);
    }
  }
  for (auto& layer : net.layers) {
    const double bound = std::sqrt(6.0 / (layer.in + layer.out));
    for (auto& v : layer.w) v = draw(bound);
  }
  return net;
}

// Gradient (or any per-parameter slot set) shaped like a network.
template <class Real>
struct GradientSet {
  std::array<std::vector<Real>, 2> embeddings{};
  struct LayerSlots {
    std::vector<Real> w, b;
  };
  std::vector<LayerSlots> layers;

  GradientSet() = default;
  explicit GradientSet(const Network<Real>& net) { resize_like(net); }

  void resize_like(const Network<Real>& net) {
    embeddings[0].assign(net.embeddings[0].size(), Real(0));
    embeddings[1].assign(net.embeddings[1].size(), Real(0));
    layers.resize(net.layers.size());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      layers[l].w.assign(net.layers[l].w.size(), Real(0));
      layers[l].b.assign(net.layers[l].b.size(), Real(0));
    }
  }

  void zero() {
    auto z = [](std::vector<Real>& v) { std::fill(v.begin(), v.end(), Real(0)); };
    z(embeddings[0]);
    z(embeddings[1]);
    for (auto& l : layers) {
      z(l.w);
      z(l.b);
    }
  }

  void scale(Real s) {
    auto m = [s](std::vector<Real>& v) {
      for (auto& x : v) x *= s;
    };
    m(embeddings[0]);
    m(embeddings[1]);
    for (auto& l : layers) {
      m(l.w);
      m(l.b);
    }
  }
};

template <class Real>
struct Workspace {
  std::vector<std::vector<Real>> pre;    // pre-activation per layer
  std::vector<std::vector<Real>> act;    // activation output per layer
  std::vector<std::vector<Real>> delta;  // dLoss/dpre per layer
  std::array<Real, 2 * kEmbeddingDim> emb_in{};

  void resize(const Network<Real>& net) {
    pre.resize(net.layers.size());
    act.resize(net.layers.size());
    delta.resize(net.layers.size());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      pre[l].assign(net.layers[l].out, Real(0));
      act[l].assign(net.layers[l].out, Real(0));
      delta[l].assign(net.layers[l].out, Real(0));
    }
  }
};

namespace detail {

// Dot product with eight independent accumulators; the split is part of the
// numeric contract, not just a speed knob, so results are identical on every
// build of the same sources.
template <class Real>
inline Real dot8(const Real* a, const Real* b, int n) {
  Real s0{}, s1{}, s2{}, s3{}, s4{}, s5{}, s6{}, s7{};
  int i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
    s4 += a[i + 4] * b[i + 4];
    s5 += a[i + 5] * b[i + 5];
    s6 += a[i + 6] * b[i + 6];
    s7 += a[i + 7] * b[i + 7];
  }
  Real s = ((s0 + s1) + (s2 + s3)) + ((s4 + s5) + (s6 + s7));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

template <class Real>
inline void axpy(Real* y, const Real* x, Real a, int n) {
  for (int i = 0; i < n; ++i) y[i] += a * x[i];
}

template <class Real>
inline void add(Real* y, const Real* x, int n) {
  for (int i = 0; i < n; ++i) y[i] += x[i];
}

}  // namespace detail

template <class Real>
void embedding_input(const Network<Real>& net, std::uint32_t x,
                     std::array<Real, 2 * kEmbeddingDim>& out) {
  out.fill(Real(0));
  std::uint32_t m = x;
  while (m != 0) {
    const int j = std::countr_zero(m);
    m &= m - 1;
    const int table = j / kEmbeddingTableRows;
    const int row = j % kEmbeddingTableRows;
    const Real* e = net.embeddings[table].data() + row * kEmbeddingDim;
    for (int d = 0; d < kEmbeddingDim; ++d) {
      out[table * kEmbeddingDim + d] += e[d];
    }
  }
}

struct ForwardResult {
  double logit = 0.0;
  double p_positive = 0.5;
};

template <class Real>
ForwardResult forward(const Network<Real>& net, std::uint32_t x, Workspace<Real>& ws) {
  const std::size_t L = net.layers.size();
  // input layer, column-major weights
  {
    const auto& layer = net.layers[0];
    auto& u = ws.pre[0];
    std::copy(layer.b.begin(), layer.b.end(), u.begin());
    if (net.spec.has_embeddings()) {
      embedding_input(net, x, ws.emb_in);
      for (int j = 0; j < layer.in; ++j) {
        detail::axpy(u.data(), layer.w.data() + std::size_t(j) * layer.out,
                     ws.emb_in[j], layer.out);
      }
    } else {
      std::uint32_t m = x;
      while (m != 0) {
        const int j = std::countr_zero(m);
        m &= m - 1;
        detail::add(u.data(), layer.w.data() + std::size_t(j) * layer.out, layer.out);
      }
    }
    if (L > 1) {
      for (int i = 0; i < layer.out; ++i) {
        ws.act[0][i] = activate(net.spec.activation, u[i]);
      }
    }
  }
  for (std::size_t l = 1; l < L; ++l) {
    const auto& layer = net.layers[l];
    const Real* in = ws.act[l - 1].data();
    auto& u = ws.pre[l];
    for (int i = 0; i < layer.out; ++i) {
      u[i] = layer.b[i] +
             detail::dot8(layer.w.data() + std::size_t(i) * layer.in, in, layer.in);
    }
    if (l + 1 < L) {
      for (int i = 0; i < layer.out; ++i) {
        ws.act[l][i] = activate(net.spec.activation, u[i]);
      }
    }
  }
  ForwardResult r;
  r.logit = static_cast<double>(ws.pre[L - 1][0]);
  r.p_positive = sigmoid(r.logit);
  return r;
}

template <class Real>
ForwardResult forward(const Network<Real>& net, std::uint32_t x) {
  Workspace<Real> ws;
  ws.resize(net);
  return forward(net, x, ws);
}

// log(1 + exp(-y * logit)), stable for large |logit|.
inline double logistic_loss(double logit, int y) {
  const double m = y > 0 ? logit : -logit;
  if (m > 0) return std::log1p(std::exp(-m));
  return -m + std::log1p(std::exp(m));
}

// Accumulates dLoss/dparam for one example into `grads`; returns the loss.
template <class Real>
double backward_accumulate(const Network<Real>& net, std::uint32_t x, int y,
                           GradientSet<Real>& grads, Workspace<Real>& ws) {
  const ForwardResult fr = forward(net, x, ws);
  const std::size_t L = net.layers.size();
  const double dlogit = sigmoid(fr.logit) - (y > 0 ? 1.0 : 0.0);
  ws.delta[L - 1][0] = static_cast<Real>(dlogit);

  for (std::size_t l = L - 1; l >= 1; --l) {
    const auto& layer = net.layers[l];
    const Real* in = ws.act[l - 1].data();
    auto& d = ws.delta[l];
    auto& gl = grads.layers[l];
    auto& dprev = ws.delta[l - 1];
    std::fill(dprev.begin(), dprev.end(), Real(0));
    for (int i = 0; i < layer.out; ++i) {
      const Real di = d[i];
      if (di != Real(0)) {
        detail::axpy(gl.w.data() + std::size_t(i) * layer.in, in, di, layer.in);
        detail::axpy(dprev.data(), layer.w.data() + std::size_t(i) * layer.in, di,
                     layer.in);
      }
      gl.b[i] += di;
    }
    for (int j = 0; j < layer.in; ++j) {
      dprev[j] *= activate_grad(net.spec.activation, ws.pre[l - 1][j]);
    }
  }

  // input layer
  {
    const auto& layer = net.layers[0];
    const auto& d = ws.delta[0];
    auto& gl = grads.layers[0];
    detail::add(gl.b.data(), d.data(), layer.out);
    if (net.spec.has_embeddings()) {
      std::array<Real, 2 * kEmbeddingDim> dinput{};
      for (int j = 0; j < layer.in; ++j) {
        const Real* col = layer.w.data() + std::size_t(j) * layer.out;
        detail::axpy(gl.w.data() + std::size_t(j) * layer.out, d.data(),
                     ws.emb_in[j], layer.out);
        dinput[j] = detail::dot8(col, d.data(), layer.out);
      }
      std::uint32_t m = x;
      while (m != 0) {
        const int j = std::countr_zero(m);
        m &= m - 1;
        const int table = j / kEmbeddingTableRows;
        const int row = j % kEmbeddingTableRows;
        Real* ge = grads.embeddings[table].data() + row * kEmbeddingDim;
        for (int dd = 0; dd < kEmbeddingDim; ++dd) {
          ge[dd] += dinput[table * kEmbeddingDim + dd];
        }
      }
    } else {
      std::uint32_t m = x;
      while (m != 0) {
        const int j = std::countr_zero(m);
        m &= m - 1;
        detail::add(gl.w.data() + std::size_t(j) * layer.out, d.data(), layer.out);
      }
    }
  }
  return logistic_loss(fr.logit, y);
}

template <class Real>
GradientSet<Real> backward(const Network<Real>& net, std::uint32_t x, int y) {
  GradientSet<Real> grads(net);
  Workspace<Real> ws;
  ws.resize(net);
  backward_accumulate(net, x, y, grads, ws);
  return grads;
}

// --- flat parameter order -------------------------------------------------
// Canonical order: embedding table 0, table 1, then per layer weights (in
// storage order) followed by biases. Checkpoints, weight exports and the
// optimizer all traverse parameters in this order.

struct ParamGroup {
  std::string id;
  std::size_t count = 0;
};

inline std::vector<ParamGroup> parameter_groups(const ArchitectureSpec& spec) {
  std::vector<ParamGroup> groups;
  if (spec.has_embeddings()) {
    groups.push_back({"emb0", std::size_t(kEmbeddingTableRows) * kEmbeddingDim});
    groups.push_back({"emb1", std::size_t(kEmbeddingTableRows) * kEmbeddingDim});
  }
  int in = spec.input_dim();
  auto hidden = spec.hidden_widths();
  hidden.push_back(1);
  for (std::size_t l = 0; l < hidden.size(); ++l) {
    groups.push_back({"w" + std::to_string(l), std::size_t(in) * hidden[l]});
    groups.push_back({"b" + std::to_string(l), std::size_t(hidden[l])});
    in = hidden[l];
  }
  return groups;
}

template <class Real>
std::vector<double> flatten_parameters(const Network<Real>& net) {
  std::vector<double> flat;
  flat.reserve(net.parameter_count());
  for (const auto& t : net.embeddings) {
    for (Real v : t) flat.push_back(static_cast<double>(v));
  }
  for (const auto& l : net.layers) {
    for (Real v : l.w) flat.push_back(static_cast<double>(v));
    for (Real v : l.b) flat.push_back(static_cast<double>(v));
  }
  return flat;
}

template <class Real>
void load_flat_parameters(Network<Real>& net, std::span<const double> flat) {
  if (flat.size() != net.parameter_count()) {
    throw std::invalid_argument("parameter vector size mismatch");
  }
  std::size_t k = 0;
  for (auto& t : net.embeddings) {
    for (auto& v : t) v = static_cast<Real>(flat[k++]);
  }
  for (auto& l : net.layers) {
    for (auto& v : l.w) v = static_cast<Real>(flat[k++]);
    for (auto& v : l.b) v = static_cast<Real>(flat[k++]);
  }
}

// --- checkpoint format ------------------------------------------------------
// "PDCK", u16 version, u8 arch, u8 activation, f64 beta, u8 precision,
// u8 reserved, u16 hidden-layer count, u16 widths..., u64 parameter count,
// then every parameter as a little-endian f64 in canonical order.

enum class Precision : std::uint8_t { f64 = 0, f32 = 1 };

struct Checkpoint {
  ArchitectureSpec spec;
  Precision precision = Precision::f64;
  std::vector<double> params;
};

namespace detail {

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_f64(std::vector<std::uint8_t>& out, double d) {
  put_u64(out, std::bit_cast<std::uint64_t>(d));
}

struct ByteReader {
  const std::uint8_t* p;
  std::size_t n;
  std::size_t pos = 0;

  std::uint8_t u8() {
    if (pos + 1 > n) throw std::runtime_error("checkpoint truncated");
    return p[pos++];
  }
  std::uint16_t u16() {
    const std::uint16_t lo = u8();
    return static_cast<std::uint16_t>(lo | (std::uint16_t(u8()) << 8));
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(u8()) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
};

}  // namespace detail

inline std::vector<std::uint8_t> checkpoint_to_bytes(const Checkpoint& ck) {
  std::vector<std::uint8_t> out;
  out.reserve(32 + ck.params.size() * 8);
  out.push_back('P');
  out.push_back('D');
  out.push_back('C');
  out.push_back('K');
  detail::put_u16(out, 1);  // version
  out.push_back(static_cast<std::uint8_t>(ck.spec.kind));
  out.push_back(static_cast<std::uint8_t>(ck.spec.activation.kind));
  detail::put_f64(out, ck.spec.activation.beta);
  out.push_back(static_cast<std::uint8_t>(ck.precision));
  out.push_back(0);
  const auto hidden = ck.spec.hidden_widths();
  detail::put_u16(out, static_cast<std::uint16_t>(hidden.size()));
  for (int w : hidden) detail::put_u16(out, static_cast<std::uint16_t>(w));
  detail::put_u64(out, ck.params.size());
  for (double v : ck.params) detail::put_f64(out, v);
  return out;
}

template <class Real>
std::vector<std::uint8_t> checkpoint_bytes(const Network<Real>& net) {
  Checkpoint ck;
  ck.spec = net.spec;
  ck.spec.widths = net.spec.hidden_widths();  // pin resolved widths
  ck.precision = sizeof(Real) == 4 ? Precision::f32 : Precision::f64;
  ck.params = flatten_parameters(net);
  return checkpoint_to_bytes(ck);
}

inline Checkpoint checkpoint_from_bytes(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r{bytes.data(), bytes.size()};
  if (r.u8() != 'P' || r.u8() != 'D' || r.u8() != 'C' || r.u8() != 'K') {
    throw std::runtime_error("not a checkpoint file (bad magic)");
  }
  const std::uint16_t version = r.u16();
  if (version != 1) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ck;
  ck.spec.kind = static_cast<ArchKind>(r.u8());
  ck.spec.activation.kind = static_cast<ActKind>(r.u8());
  ck.spec.activation.beta = r.f64();
  ck.precision = static_cast<Precision>(r.u8());
  r.u8();  // reserved
  const std::uint16_t nh = r.u16();
  ck.spec.widths.resize(nh);
  for (auto& w : ck.spec.widths) w = r.u16();
  const std::uint64_t count = r.u64();
  if (count != parameter_count(ck.spec)) {
    throw std::runtime_error("checkpoint parameter count does not match its architecture");
  }
  ck.params.resize(count);
  for (auto& v : ck.params) v = r.f64();
  if (r.pos != bytes.size()) throw std::runtime_error("trailing bytes in checkpoint");
  return ck;
}

template <class Real>
void save_checkpoint(const Network<Real>& net, const std::string& path) {
  const auto bytes = checkpoint_bytes(net);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return checkpoint_from_bytes(bytes);
}

inline bool spec_compatible(const ArchitectureSpec& a, const ArchitectureSpec& b) {
  return a.kind == b.kind && a.activation.kind == b.activation.kind &&
         a.activation.beta == b.activation.beta &&
         a.hidden_widths() == b.hidden_widths();
}

template <class Real>
Network<Real> network_from_checkpoint(const Checkpoint& ck) {
  auto net = make_network_zeros<Real>(ck.spec);
  load_flat_parameters(net, ck.params);
  return net;
}

}  // namespace pdlab
