#ifndef HOPEWAVE_SELFTEST_HPP
#define HOPEWAVE_SELFTEST_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hopewave/backward.hpp"
#include "hopewave/corpus.hpp"
#include "hopewave/loss.hpp"
#include "hopewave/model.hpp"

namespace hopewave {

struct SelftestResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

inline ModelConfig selftest_model() {
  ModelConfig c;
  c.wavelet_channels = 2;
  c.encoder_widths = {3, 3};
  c.latent_hidden = 4;
  c.latent_dim = 4;
  c.decoder_widths = {3, 3};
  c.head_widths = {4};
  c.hops = {1, 2};
  return c;
}

inline ModelParams perturbed(const ModelConfig& cfg, std::uint64_t seed) {
  ModelParams p = init_params(cfg, seed);
  Rng rng(seed, {0x5354});
  for (Eigen::Index i = 0; i < p.values.size(); ++i) p.values(i) += 0.1 * rng.uniform(-1.0, 1.0);
  return p;
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace detail

/// Model outputs on relabeled random graphs, compared against relabeled outputs.
inline SelftestResult selftest_equivariance(int trials = 10) {
  const ModelConfig cfg = detail::selftest_model();
  const ModelParams p = detail::perturbed(cfg, 1);
  Rng rng(0x4551);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const int n = 3 + static_cast<int>(rng.below(12));
    const Graph g = gen_synthetic(GraphKind::erdos_renyi, {.n = n, .p = 0.3}, rng.next());
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    rng.shuffle(perm);
    const Permutation sigma(perm);
    const auto a = forward_full(wavelet_exact(normalized_operators(g), {1.0, 4.0}), p);
    const auto b = forward_full(wavelet_exact(normalized_operators(g.relabeled(sigma)), {1.0, 4.0}), p);
    worst = std::max(worst, (permute(a.encoder.latent, sigma) - b.encoder.latent).cwiseAbs().maxCoeff());
    worst = std::max(worst, (permute(a.predictions(), sigma).data - b.predictions().data).cwiseAbs().maxCoeff());
  }
  return {"equivariance", worst <= 1e-9, "max deviation " + detail::fmt(worst)};
}

/// Kept entries per class equal min(#edges, #non-edges, T) on random targets.
inline SelftestResult selftest_mask_balance(int draws = 200) {
  Rng rng(0x4D42);
  for (int d = 0; d < draws; ++d) {
    const Graph g = gen_synthetic(GraphKind::erdos_renyi, {.n = 3 + static_cast<int>(rng.below(14)), .p = 0.3}, rng.next());
    const auto targets = hop_adjacency_stack(g, {1, 2, 4});
    const int threshold = 1 + static_cast<int>(rng.below(30));
    const MaskTensor m = sample_mask(targets, threshold, rng.next());
    for (int c = 0; c < m.channels; ++c) {
      int ones = 0, zeros = 0;
      for (int v = 0; v < m.n; ++v)
        for (int u = 0; u <= v; ++u)
          if (m.kept(u, v, c)) ++(targets.data(u, v, c) > 0.5 ? ones : zeros);
      const auto& st = m.per_channel[static_cast<std::size_t>(c)];
      const int expect = st.saturated ? 0 : std::min({st.edges_total, st.nonedges_total, threshold});
      if (ones != expect || zeros != expect)
        return {"mask-balance", false, "draw " + std::to_string(d) + " channel " + std::to_string(c)};
    }
  }
  return {"mask-balance", true, std::to_string(draws) + " masks balanced"};
}

/// Reverse-mode gradient of the masked loss against central differences.
inline SelftestResult selftest_gradient(std::uint64_t seed = 1) {
  const ModelConfig cfg = detail::selftest_model();
  const ModelParams p = detail::perturbed(cfg, seed);
  const Graph g = gen_synthetic(GraphKind::erdos_renyi, {.n = 6, .p = 0.5, .connected = true}, seed);
  const auto targets = hop_adjacency_stack(g, cfg.hops);
  const auto w = wavelet_exact(normalized_operators(g), {1.0, 4.0});
  const MaskTensor mask = sample_mask(targets, 100, seed);
  const auto trace = forward_full(w, p);
  const Vector analytic = backward(trace, p, masked_bce(trace.predictions(), targets, mask).grad_logits).values;
  constexpr double h = 1e-5;
  constexpr double floor = 1e-6;  // below this, central-difference roundoff dominates
  ModelParams probe = p;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < p.values.size(); ++i) {
    const double orig = probe.values(i);
    probe.values(i) = orig + h;
    const double up = masked_bce(decoder_forward(encoder_forward(w, probe), probe), targets, mask).loss;
    probe.values(i) = orig - h;
    const double down = masked_bce(decoder_forward(encoder_forward(w, probe), probe), targets, mask).loss;
    probe.values(i) = orig;
    const double fd = (up - down) / (2.0 * h);
    const double scale = std::max(std::abs(fd), std::abs(analytic(i)));
    if (scale > floor) worst = std::max(worst, std::abs(fd - analytic(i)) / scale);
  }
  return {"gradient-check", worst <= 1e-4, "max relative error " + detail::fmt(worst)};
}

inline std::vector<SelftestResult> run_selftest() {
  return {selftest_equivariance(), selftest_mask_balance(), selftest_gradient()};
}

}  // namespace hopewave

#endif
