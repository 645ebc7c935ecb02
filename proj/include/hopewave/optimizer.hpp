#ifndef HOPEWAVE_OPTIMIZER_HPP
#define HOPEWAVE_OPTIMIZER_HPP

#include <cmath>
#include <cstdint>

#include "hopewave/error.hpp"
#include "hopewave/model.hpp"

namespace hopewave {

struct AdamConfig {
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 5.0;  ///< global gradient norm cap; <= 0 disables clipping
};

struct OptimizerState {
  Vector first_moment;
  Vector second_moment;
  std::int64_t step = 0;

  static OptimizerState for_params(const ModelParams& p) {
    return {Vector::Zero(p.values.size()), Vector::Zero(p.values.size()), 0};
  }
};

/// One bias-corrected Adam update after clipping the gradient to `clip_norm`.
/// Returns the pre-clip gradient norm.
inline double adam_step(ModelParams& params, Vector grads, OptimizerState& state, const AdamConfig& cfg) {
  if (grads.size() != params.values.size() || state.first_moment.size() != params.values.size())
    throw ShapeError("gradient / optimizer state size does not match parameters");
  for (Eigen::Index i = 0; i < grads.size(); ++i)
    if (!std::isfinite(grads(i)))
      throw NumericError("non-finite gradient in parameter block '" + params.layout.params.owner(static_cast<std::size_t>(i)) +
                         "'");
  const double norm = grads.norm();
  if (cfg.clip_norm > 0.0 && norm > cfg.clip_norm) grads *= cfg.clip_norm / norm;

  ++state.step;
  state.first_moment = cfg.beta1 * state.first_moment + (1.0 - cfg.beta1) * grads;
  state.second_moment = cfg.beta2 * state.second_moment + (1.0 - cfg.beta2) * grads.cwiseAbs2();
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  params.values.array() -=
      cfg.learning_rate * (state.first_moment.array() / c1) / ((state.second_moment.array() / c2).sqrt() + cfg.epsilon);
  return norm;
}

}  // namespace hopewave

#endif
