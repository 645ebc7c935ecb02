#ifndef HOPEWAVE_LOSS_HPP
#define HOPEWAVE_LOSS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "hopewave/error.hpp"
#include "hopewave/graph.hpp"
#include "hopewave/random.hpp"
#include "hopewave/tensor.hpp"

namespace hopewave {

struct ChannelMaskStats {
  int edges_kept = 0;
  int nonedges_kept = 0;
  int edges_total = 0;     ///< target-1 entries in the upper triangle (diagonal included)
  int nonedges_total = 0;  ///< target-0 entries in the upper triangle (diagonal included)
  bool saturated = false;  ///< one of the two classes is empty

  int kept() const { return edges_kept + nonedges_kept; }
};

/// Binary n x n x r selection of entries that enter the loss. Always symmetric.
///
/// Counting uses the upper triangle including the diagonal, so an undirected
/// pair is one entry; kept entries are mirrored to the lower triangle.
struct MaskTensor {
  int n = 0;
  int channels = 0;
  std::vector<std::uint8_t> data;
  std::vector<ChannelMaskStats> per_channel;

  bool kept(int u, int v, int c) const {
    return data[static_cast<std::size_t>(u + v * n) + static_cast<std::size_t>(c) * n * n] != 0;
  }
  void keep(int u, int v, int c) {
    const std::size_t base = static_cast<std::size_t>(c) * n * n;
    data[base + static_cast<std::size_t>(u + v * n)] = 1;
    data[base + static_cast<std::size_t>(v + u * n)] = 1;
  }
};

inline constexpr double kBceClamp = 1e-7;

namespace detail {

inline MaskTensor empty_mask(const HopAdjacencyStack& t) {
  MaskTensor m;
  m.n = t.n();
  m.channels = t.channels();
  m.data.assign(static_cast<std::size_t>(m.n) * m.n * m.channels, 0);
  m.per_channel.resize(static_cast<std::size_t>(m.channels));
  return m;
}

}  // namespace detail

/// Balanced mask: per channel, m = min(#edges, #non-edges, threshold) entries of
/// each class drawn uniformly without replacement. Channels missing a class are
/// saturated and keep nothing.
inline MaskTensor sample_mask(const HopAdjacencyStack& targets, int threshold, std::uint64_t seed) {
  if (threshold < 1) throw InputError("mask threshold must be >= 1");
  MaskTensor m = detail::empty_mask(targets);
  const int n = m.n;
  for (int c = 0; c < m.channels; ++c) {
    std::vector<std::pair<int, int>> ones, zeros;
    for (int v = 0; v < n; ++v)
      for (int u = 0; u <= v; ++u) (targets.data(u, v, c) > 0.5 ? ones : zeros).emplace_back(u, v);
    auto& st = m.per_channel[static_cast<std::size_t>(c)];
    st.edges_total = static_cast<int>(ones.size());
    st.nonedges_total = static_cast<int>(zeros.size());
    st.saturated = ones.empty() || zeros.empty();
    if (st.saturated) continue;
    const auto k = static_cast<std::size_t>(std::min({st.edges_total, st.nonedges_total, threshold}));
    Rng rng(seed, {static_cast<std::uint64_t>(c)});
    for (auto [u, v] : rng.sample_without_replacement(ones, k)) m.keep(u, v, c);
    for (auto [u, v] : rng.sample_without_replacement(zeros, k)) m.keep(u, v, c);
    st.edges_kept = st.nonedges_kept = static_cast<int>(k);
  }
  return m;
}

/// Every entry kept (masking disabled). Class counts are still recorded.
inline MaskTensor full_mask(const HopAdjacencyStack& targets) {
  MaskTensor m = detail::empty_mask(targets);
  std::fill(m.data.begin(), m.data.end(), std::uint8_t{1});
  for (int c = 0; c < m.channels; ++c) {
    auto& st = m.per_channel[static_cast<std::size_t>(c)];
    for (int v = 0; v < m.n; ++v)
      for (int u = 0; u <= v; ++u) ++(targets.data(u, v, c) > 0.5 ? st.edges_total : st.nonedges_total);
    st.edges_kept = st.edges_total;
    st.nonedges_kept = st.nonedges_total;
    st.saturated = st.edges_total == 0 || st.nonedges_total == 0;
  }
  return m;
}

struct BceResult {
  double loss = 0.0;
  std::vector<std::optional<double>> per_channel;  ///< empty for channels with no kept entries
  int active_channels = 0;
  /// dL/d(symmetrized logit) on kept upper-triangle entries; zero elsewhere.
  Matrix grad_logits;
};

/// Masked binary cross-entropy, averaged over kept entries per channel and then
/// over channels that keep anything. Probabilities are clamped to [1e-7, 1-1e-7].
inline BceResult masked_bce(const PairTensor& predictions, const HopAdjacencyStack& targets, const MaskTensor& mask) {
  const int n = predictions.n;
  const int r = predictions.channels();
  if (targets.n() != n || targets.channels() != r || mask.n != n || mask.channels != r)
    throw ShapeError("predictions, targets and mask disagree in shape");
  BceResult out;
  out.per_channel.resize(static_cast<std::size_t>(r));
  out.grad_logits = Matrix::Zero(static_cast<Eigen::Index>(n) * n, r);
  for (int c = 0; c < r; ++c)
    if (mask.per_channel[static_cast<std::size_t>(c)].kept() > 0) ++out.active_channels;
  if (out.active_channels == 0) throw InputError("no trainable entries: every hop channel is masked out");

  for (int c = 0; c < r; ++c) {
    const int kept = mask.per_channel[static_cast<std::size_t>(c)].kept();
    if (kept == 0) continue;
    const double scale = 1.0 / (static_cast<double>(kept) * out.active_channels);
    double sum = 0.0;
    int counted = 0;
    for (int v = 0; v < n; ++v) {
      for (int u = 0; u <= v; ++u) {
        if (!mask.kept(u, v, c)) continue;
        const double y = targets.data(u, v, c);
        const double p_raw = predictions(u, v, c);
        const double p = std::clamp(p_raw, kBceClamp, 1.0 - kBceClamp);
        sum -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
        ++counted;
        if (p == p_raw) out.grad_logits(u + v * n, c) = (p - y) * scale;
      }
    }
    if (counted != kept) throw InvariantError("mask statistics disagree with mask entries");
    out.per_channel[static_cast<std::size_t>(c)] = sum / kept;
    out.loss += sum / kept;
  }
  out.loss /= out.active_channels;
  return out;
}

/// Correct / scored counts of thresholded predictions (p >= 0.5 is class 1) over
/// kept upper-triangle entries, per channel.
struct ChannelScore {
  int correct = 0;
  int scored = 0;
  int true_pos = 0, positives = 0;
  int true_neg = 0, negatives = 0;

  double accuracy() const { return scored > 0 ? static_cast<double>(correct) / scored : 0.0; }
};

inline std::vector<ChannelScore> score_predictions(const PairTensor& predictions, const HopAdjacencyStack& targets,
                                                   const MaskTensor& mask) {
  const int n = predictions.n;
  std::vector<ChannelScore> out(static_cast<std::size_t>(predictions.channels()));
  for (int c = 0; c < predictions.channels(); ++c) {
    auto& s = out[static_cast<std::size_t>(c)];
    for (int v = 0; v < n; ++v)
      for (int u = 0; u <= v; ++u) {
        if (!mask.kept(u, v, c)) continue;
        const bool y = targets.data(u, v, c) > 0.5;
        const bool yhat = predictions(u, v, c) >= 0.5;
        ++s.scored;
        if (y) {
          ++s.positives;
          if (yhat) ++s.true_pos;
        } else {
          ++s.negatives;
          if (!yhat) ++s.true_neg;
        }
      }
    s.correct = s.true_pos + s.true_neg;
  }
  return out;
}

}  // namespace hopewave

#endif
