#ifndef HOPEWAVE_MODEL_HPP
#define HOPEWAVE_MODEL_HPP

#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "hopewave/equivariant.hpp"
#include "hopewave/error.hpp"
#include "hopewave/graph.hpp"
#include "hopewave/random.hpp"
#include "hopewave/spectral.hpp"
#include "hopewave/tensor.hpp"

namespace hopewave {

/// Architecture of the autoencoder. Parameter count depends only on this, never on n.
struct ModelConfig {
  int wavelet_channels = 4;
  std::vector<int> encoder_widths{8, 16, 32};
  int latent_hidden = 32;
  int latent_dim = 20;
  std::vector<int> decoder_widths{32, 16, 8};
  std::vector<int> head_widths{32, 32};
  std::vector<int> hops{1, 2, 4, 8, 16, 32, 64, 128};

  int hop_count() const { return static_cast<int>(hops.size()); }

  void validate() const {
    auto positive = [](int v, const char* what) {
      if (v < 1) throw InputError(std::string(what) + " must be positive");
    };
    positive(wavelet_channels, "wavelet_channels");
    positive(latent_hidden, "latent_hidden");
    positive(latent_dim, "latent_dim");
    for (int w : encoder_widths) positive(w, "encoder width");
    for (int w : decoder_widths) positive(w, "decoder width");
    for (int w : head_widths) positive(w, "head width");
    if (encoder_widths.empty()) throw InputError("encoder needs at least one layer");
    validate_hops(hops);
  }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Named slice of the flat parameter vector, viewed as a rows x cols column-major matrix.
struct ParamBlock {
  std::string name;
  std::size_t offset = 0;
  int rows = 0;
  int cols = 0;

  std::size_t size() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
  bool is_bias() const { return cols == 1 && name.size() >= 2 && name.compare(name.size() - 2, 2, ".b") == 0; }
};

class ParamLayout {
public:
  std::size_t add(std::string name, int rows, int cols) {
    blocks_.push_back({std::move(name), total_, rows, cols});
    total_ += blocks_.back().size();
    return blocks_.size() - 1;
  }

  const std::vector<ParamBlock>& blocks() const { return blocks_; }
  const ParamBlock& operator[](std::size_t i) const { return blocks_[i]; }
  std::size_t total() const { return total_; }

  const ParamBlock* find(const std::string& name) const {
    for (const auto& b : blocks_)
      if (b.name == name) return &b;
    return nullptr;
  }

  /// Name of the block holding flat index i.
  const std::string& owner(std::size_t i) const {
    for (const auto& b : blocks_)
      if (i >= b.offset && i < b.offset + b.size()) return b.name;
    throw InvariantError("parameter index out of layout");
  }

  friend bool operator==(const ParamLayout& a, const ParamLayout& b) {
    if (a.total_ != b.total_ || a.blocks_.size() != b.blocks_.size()) return false;
    for (std::size_t i = 0; i < a.blocks_.size(); ++i) {
      const auto &x = a.blocks_[i], &y = b.blocks_[i];
      if (x.name != y.name || x.offset != y.offset || x.rows != y.rows || x.cols != y.cols) return false;
    }
    return true;
  }

private:
  std::vector<ParamBlock> blocks_;
  std::size_t total_ = 0;
};

/// Block indices of one second-order layer inside a ParamLayout.
struct SecondOrderSlots {
  std::size_t identity, transpose, row_bcast, col_bcast, diag, bias;
};

struct DenseSlots {
  std::size_t weight, bias;
};

/// Where every layer's blocks sit. Derived from ModelConfig alone.
struct ModelLayout {
  ParamLayout params;
  std::vector<SecondOrderSlots> encoder;
  DenseSlots latent_in{}, latent_out{};
  std::vector<SecondOrderSlots> decoder;
  std::vector<DenseSlots> head;
};

inline ModelLayout make_layout(const ModelConfig& cfg) {
  cfg.validate();
  ModelLayout l;
  auto second_order = [&](const std::string& prefix, int c_in, int c_out) {
    SecondOrderSlots s{};
    s.identity = l.params.add(prefix + ".w_id", c_out, c_in);
    s.transpose = l.params.add(prefix + ".w_tr", c_out, c_in);
    s.row_bcast = l.params.add(prefix + ".w_row", c_out, c_in);
    s.col_bcast = l.params.add(prefix + ".w_col", c_out, c_in);
    s.diag = l.params.add(prefix + ".w_diag", c_out, c_in);
    s.bias = l.params.add(prefix + ".b", c_out, 1);
    return s;
  };
  auto dense = [&](const std::string& prefix, int c_in, int c_out) {
    DenseSlots s{};
    s.weight = l.params.add(prefix + ".w", c_out, c_in);
    s.bias = l.params.add(prefix + ".b", c_out, 1);
    return s;
  };
  int c = cfg.wavelet_channels;
  for (std::size_t i = 0; i < cfg.encoder_widths.size(); ++i) {
    l.encoder.push_back(second_order("enc" + std::to_string(i), c, cfg.encoder_widths[i]));
    c = cfg.encoder_widths[i];
  }
  l.latent_in = dense("lat0", 2 * c, cfg.latent_hidden);
  l.latent_out = dense("lat1", cfg.latent_hidden, cfg.latent_dim);
  c = 2 * cfg.latent_dim;
  for (std::size_t i = 0; i < cfg.decoder_widths.size(); ++i) {
    l.decoder.push_back(second_order("dec" + std::to_string(i), c, cfg.decoder_widths[i]));
    c = cfg.decoder_widths[i];
  }
  for (std::size_t i = 0; i < cfg.head_widths.size(); ++i) {
    l.head.push_back(dense("head" + std::to_string(i), c, cfg.head_widths[i]));
    c = cfg.head_widths[i];
  }
  l.head.push_back(dense("head" + std::to_string(cfg.head_widths.size()), c, cfg.hop_count()));
  return l;
}

/// 64-bit FNV-1a over the raw bytes of a parameter vector.
inline std::uint64_t fingerprint(const Vector& v) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  const auto* p = reinterpret_cast<const unsigned char*>(v.data());
  for (std::size_t i = 0; i < static_cast<std::size_t>(v.size()) * sizeof(double); ++i) {
    h ^= p[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// All trainable weights, flattened. Blocks are addressed through `layout`.
struct ModelParams {
  ModelConfig config;
  ModelLayout layout;
  Vector values;
  std::uint64_t init_seed = 0;

  Eigen::Map<const Matrix> block(std::size_t slot) const {
    const auto& b = layout.params[slot];
    return {values.data() + b.offset, b.rows, b.cols};
  }
  Eigen::Map<const Vector> bias(std::size_t slot) const {
    const auto& b = layout.params[slot];
    return {values.data() + b.offset, b.rows};
  }
  Eigen::Map<Matrix> mutable_block(std::size_t slot) {
    const auto& b = layout.params[slot];
    return {values.data() + b.offset, b.rows, b.cols};
  }

  using ConstWeights = SecondOrderWeights<Eigen::Map<const Matrix>, Eigen::Map<const Vector>>;
  ConstWeights second_order(const SecondOrderSlots& s) const {
    return {block(s.identity), block(s.transpose), block(s.row_bcast), block(s.col_bcast), block(s.diag), bias(s.bias)};
  }
};

/// Glorot-uniform weights from the seeded generator, zero biases.
inline ModelParams init_params(const ModelConfig& cfg, std::uint64_t seed) {
  ModelParams p{cfg, make_layout(cfg), Vector(), seed};
  p.values = Vector::Zero(static_cast<Eigen::Index>(p.layout.params.total()));
  Rng rng(seed, {0x494E4954});
  for (const auto& b : p.layout.params.blocks()) {
    if (b.is_bias()) continue;
    const double limit = std::sqrt(6.0 / (b.rows + b.cols));
    for (std::size_t i = 0; i < b.size(); ++i) p.values(static_cast<Eigen::Index>(b.offset + i)) = rng.uniform(-limit, limit);
  }
  return p;
}

/// Gradient vector with the same layout as ModelParams.
struct ParamGrads {
  const ModelLayout* layout = nullptr;
  Vector values;

  explicit ParamGrads(const ModelParams& p) : layout(&p.layout), values(Vector::Zero(p.values.size())) {}

  Eigen::Map<Matrix> block(std::size_t slot) {
    const auto& b = layout->params[slot];
    return {values.data() + b.offset, b.rows, b.cols};
  }
  Eigen::Map<Vector> bias(std::size_t slot) {
    const auto& b = layout->params[slot];
    return {values.data() + b.offset, b.rows};
  }
  using Weights = SecondOrderWeights<Eigen::Map<Matrix>, Eigen::Map<Vector>>;
  Weights second_order(const SecondOrderSlots& s) {
    return {block(s.identity), block(s.transpose), block(s.row_bcast), block(s.col_bcast), block(s.diag), bias(s.bias)};
  }
};

inline double sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

/// Encoder activations.
struct EncoderTrace {
  PairTensor input;
  std::vector<PairTensor> layers;  ///< post-ReLU output of every second-order layer
  NodeTensor pooled;               ///< [diag || row sum / n]
  NodeTensor hidden;               ///< post-ReLU latent MLP hidden layer
  NodeTensor latent;               ///< Z
};

/// Decoder activations.
struct DecoderTrace {
  NodeTensor latent;
  PairTensor lifted;                ///< F = [outer(Z) || diag(Z)]
  std::vector<PairTensor> layers;   ///< post-ReLU second-order outputs
  std::vector<Matrix> head_hidden;  ///< post-ReLU per-entry MLP activations, (n*n) x width
  Matrix logits;                    ///< raw head output, (n*n) x r
  PairTensor sym_logits;            ///< (logits + logits^T) / 2
  PairTensor probabilities;         ///< sigmoid(sym_logits)
};

struct ForwardTrace {
  EncoderTrace encoder;
  DecoderTrace decoder;
  std::uint64_t params_fingerprint = 0;

  int n() const { return encoder.input.n; }
  const PairTensor& predictions() const { return decoder.probabilities; }
};

inline EncoderTrace encoder_trace(const WaveletTensor& w, const ModelParams& p) {
  const auto& cfg = p.config;
  if (w.channels() != cfg.wavelet_channels)
    throw ShapeError("model expects " + std::to_string(cfg.wavelet_channels) + " wavelet channels, got " +
                     std::to_string(w.channels()));
  EncoderTrace t;
  t.input = w.data;
  const PairTensor* x = &t.input;
  for (const auto& slots : p.layout.encoder) {
    t.layers.push_back(second_order_layer(*x, p.second_order(slots)));
    x = &t.layers.back();
  }
  const NodeTensor d = eq_diag_extract(*x);
  const NodeTensor r = eq_row_sum(*x);
  t.pooled.resize(x->n, d.cols() + r.cols());
  t.pooled << d, r;
  t.hidden = ((t.pooled * p.block(p.layout.latent_in.weight).transpose()).rowwise() +
              p.bias(p.layout.latent_in.bias).transpose())
                 .cwiseMax(0.0);
  t.latent = (t.hidden * p.block(p.layout.latent_out.weight).transpose()).rowwise() +
             p.bias(p.layout.latent_out.bias).transpose();
  return t;
}

/// Z = E(W): an n x latent_dim node encoding.
inline NodeTensor encoder_forward(const WaveletTensor& w, const ModelParams& p) { return encoder_trace(w, p).latent; }

inline DecoderTrace decoder_trace(const NodeTensor& z, const ModelParams& p) {
  const auto& cfg = p.config;
  if (z.cols() != cfg.latent_dim)
    throw ShapeError("latent width " + std::to_string(z.cols()) + " != " + std::to_string(cfg.latent_dim));
  const int n = static_cast<int>(z.rows());
  DecoderTrace t;
  t.latent = z;
  t.lifted = PairTensor(n, 2 * cfg.latent_dim);
  t.lifted.data.leftCols(cfg.latent_dim) = eq_outer_product(z).data;
  t.lifted.data.rightCols(cfg.latent_dim) = eq_diag_embed(z).data;
  const PairTensor* x = &t.lifted;
  for (const auto& slots : p.layout.decoder) {
    t.layers.push_back(second_order_layer(*x, p.second_order(slots)));
    x = &t.layers.back();
  }
  const Matrix* h = &x->data;
  for (std::size_t i = 0; i + 1 < p.layout.head.size(); ++i) {
    const auto& s = p.layout.head[i];
    t.head_hidden.push_back(((*h * p.block(s.weight).transpose()).rowwise() + p.bias(s.bias).transpose()).cwiseMax(0.0));
    h = &t.head_hidden.back();
  }
  const auto& out = p.layout.head.back();
  t.logits = (*h * p.block(out.weight).transpose()).rowwise() + p.bias(out.bias).transpose();
  t.sym_logits = PairTensor(n, 0.5 * (t.logits + detail::pair_transpose(t.logits, n)));
  t.probabilities = PairTensor(n, t.sym_logits.data.unaryExpr([](double v) { return sigmoid(v); }));
  return t;
}

/// Predicted hop probabilities, n x n x r, symmetric, entries in (0, 1).
inline PairTensor decoder_forward(const NodeTensor& z, const ModelParams& p) { return decoder_trace(z, p).probabilities; }

inline ForwardTrace forward_full(const WaveletTensor& w, const ModelParams& p) {
  ForwardTrace t;
  t.encoder = encoder_trace(w, p);
  t.decoder = decoder_trace(t.encoder.latent, p);
  t.params_fingerprint = fingerprint(p.values);
  return t;
}

/// Wavelet settings used to turn a graph into model input.
struct WaveletConfig {
  std::vector<double> scales = default_scales();
  WaveletMethod method = WaveletMethod::chebyshev;
  int order = 50;

  friend bool operator==(const WaveletConfig&, const WaveletConfig&) = default;
};

/// Per-node structural encoding table (n x latent_dim) for a graph.
inline NodeTensor extract_pe(const Graph& g, const ModelParams& p, const WaveletConfig& wc) {
  return encoder_forward(compute_wavelet(g, wc.scales, wc.method, wc.order), p);
}

}  // namespace hopewave

#endif
