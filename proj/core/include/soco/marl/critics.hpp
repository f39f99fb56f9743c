#pragma once

#include "soco/numerics/adam.hpp"
#include "soco/numerics/mlp.hpp"

namespace soco::marl {

// Two centralized critics Q(s, joint action) -> scalar, shared by all agents,
// with target copies that change only through soft_update.
struct TwinCritics {
  numerics::Mlp q1, q2;
  numerics::Mlp target1, target2;
  numerics::AdamState adam1, adam2;

  TwinCritics() = default;
  TwinCritics(std::size_t state_width, std::size_t joint_act_width, std::size_t hidden,
              double learning_rate, Rng& rng);

  std::size_t input_width() const { return q1.input_width(); }
};

// [states | joint actions] row-wise concatenation.
numerics::Tensor critic_input(const numerics::Tensor& states,
                              const numerics::Tensor& joint_actions);

// target <- tau * online + (1 - tau) * target, per parameter.
void soft_update(numerics::ParamSet& target, const numerics::ParamSet& online, double tau);

}  // namespace soco::marl
