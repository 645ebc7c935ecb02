#ifndef HOPEWAVE_TESTS_FINITE_DIFFERENCE_HPP
#define HOPEWAVE_TESTS_FINITE_DIFFERENCE_HPP

#include <algorithm>
#include <cmath>

#include "hopewave/backward.hpp"
#include "hopewave/graph.hpp"
#include "hopewave/loss.hpp"
#include "hopewave/model.hpp"
#include "hopewave/random.hpp"

namespace oracle {

struct GradientCheck {
  double worst_relative = 0.0;
  std::size_t checked = 0;  ///< parameters with |grad| above the floor
  std::string worst_block;
  double worst_absolute_below_floor = 0.0;  ///< central-difference roundoff dominates there
};

/// Central differences of the masked loss against reverse mode, over every parameter.
inline GradientCheck check_gradients(const hopewave::ModelParams& params, const hopewave::WaveletTensor& w,
                                     const hopewave::HopAdjacencyStack& targets, const hopewave::MaskTensor& mask,
                                     double h = 1e-5, double floor = 1e-6) {
  using namespace hopewave;
  auto loss_at = [&](const ModelParams& p) { return masked_bce(forward_full(w, p).predictions(), targets, mask).loss; };
  const ForwardTrace trace = forward_full(w, params);
  const Vector analytic = backward(trace, params, masked_bce(trace.predictions(), targets, mask).grad_logits).values;
  GradientCheck out;
  ModelParams probe = params;
  for (Eigen::Index i = 0; i < params.values.size(); ++i) {
    const double orig = probe.values(i);
    probe.values(i) = orig + h;
    const double up = loss_at(probe);
    probe.values(i) = orig - h;
    const double down = loss_at(probe);
    probe.values(i) = orig;
    const double fd = (up - down) / (2.0 * h);
    if (std::max(std::abs(fd), std::abs(analytic(i))) <= floor) {
      out.worst_absolute_below_floor = std::max(out.worst_absolute_below_floor, std::abs(fd - analytic(i)));
      continue;
    }
    ++out.checked;
    const double rel = std::abs(fd - analytic(i)) / std::max(std::abs(fd), std::abs(analytic(i)));
    if (rel > out.worst_relative) {
      out.worst_relative = rel;
      out.worst_block = params.layout.params.owner(static_cast<std::size_t>(i));
    }
  }
  return out;
}

/// The small model used for gradient checks: n=6, k=2, widths [3,3], latent 4, r=2.
inline hopewave::ModelConfig tiny_config() {
  hopewave::ModelConfig c;
  c.wavelet_channels = 2;
  c.encoder_widths = {3, 3};
  c.latent_hidden = 4;
  c.latent_dim = 4;
  c.decoder_widths = {3, 3};
  c.head_widths = {4};
  c.hops = {1, 2};
  return c;
}

/// Initialized parameters with every entry (biases included) nudged off its initial value.
inline hopewave::ModelParams jittered_params(const hopewave::ModelConfig& cfg, std::uint64_t seed) {
  auto p = hopewave::init_params(cfg, seed);
  hopewave::Rng rng(seed, {0x4A4954});
  for (Eigen::Index i = 0; i < p.values.size(); ++i) p.values(i) += 0.1 * rng.uniform(-1.0, 1.0);
  return p;
}

}  // namespace oracle

#endif
