#pragma once

#include <cstdint>

#include "soco/numerics/tensor.hpp"

namespace soco::numerics {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  ParamSet first_moment;
  ParamSet second_moment;
  std::int64_t step = 0;

  AdamState() = default;
  AdamState(const ParamSet& like, AdamConfig cfg);
};

// Bias-corrected Adam update applied in place. Throws NonFiniteError before
// touching anything if a gradient is not finite.
void adam_step(ParamSet& params, const ParamSet& grads, AdamState& state);

}  // namespace soco::numerics
