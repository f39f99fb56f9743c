#include "soco/numerics/adam.hpp"

#include <cmath>

#include "soco/error.hpp"

namespace soco::numerics {

AdamState::AdamState(const ParamSet& like, AdamConfig cfg)
    : config(cfg), first_moment(zeros_like(like)), second_moment(zeros_like(like)) {}

void adam_step(ParamSet& params, const ParamSet& grads, AdamState& state) {
  require_same_shapes(params, grads, "adam_step");
  require_same_shapes(params, state.first_moment, "adam_step moments");
  for (const auto& g : grads) g.require_finite("adam gradient");

  const auto& c = state.config;
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);

  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i].data();
    auto g = grads[i].data();
    auto m = state.first_moment[i].data();
    auto v = state.second_moment[i].data();
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * g[j];
      v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * g[j] * g[j];
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      p[j] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
  }
}

}  // namespace soco::numerics
