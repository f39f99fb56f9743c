#include "soco/marl/critics.hpp"

#include "soco/error.hpp"

namespace soco::marl {

TwinCritics::TwinCritics(std::size_t state_width, std::size_t joint_act_width,
                         std::size_t hidden, double learning_rate, Rng& rng)
    : q1({state_width + joint_act_width, hidden, 1}, numerics::OutputHead::kIdentity, rng),
      q2({state_width + joint_act_width, hidden, 1}, numerics::OutputHead::kIdentity, rng),
      target1(q1),
      target2(q2),
      adam1(q1.params(), {.learning_rate = learning_rate}),
      adam2(q2.params(), {.learning_rate = learning_rate}) {}

numerics::Tensor critic_input(const numerics::Tensor& states,
                              const numerics::Tensor& joint_actions) {
  if (states.rows() != joint_actions.rows()) throw ShapeError("critic_input: row mismatch");
  const std::size_t b = states.rows(), sw = states.cols(), aw = joint_actions.cols();
  numerics::Tensor out = numerics::Tensor::matrix(b, sw + aw);
  for (std::size_t r = 0; r < b; ++r) {
    auto dst = out.row(r);
    const auto s = states.row(r);
    const auto a = joint_actions.row(r);
    std::copy(s.begin(), s.end(), dst.begin());
    std::copy(a.begin(), a.end(), dst.begin() + static_cast<std::ptrdiff_t>(sw));
  }
  return out;
}

void soft_update(numerics::ParamSet& target, const numerics::ParamSet& online, double tau) {
  numerics::require_same_shapes(target, online, "soft_update");
  if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("soft_update: tau must be in [0, 1]");
  for (std::size_t i = 0; i < target.size(); ++i) {
    auto t = target[i].data();
    const auto o = online[i].data();
    for (std::size_t j = 0; j < t.size(); ++j) t[j] = tau * o[j] + (1.0 - tau) * t[j];
  }
}

}  // namespace soco::marl
