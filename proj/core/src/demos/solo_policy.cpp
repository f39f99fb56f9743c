#include "soco/demos/solo_policy.hpp"

#include "soco/error.hpp"
#include "soco/numerics/hash.hpp"

namespace soco::demos {

SoloPolicy::SoloPolicy(numerics::Mlp net) : net_(std::move(net)) {
  if (net_.head() != numerics::OutputHead::kTanh) {
    throw ConfigError("solo policy requires a tanh output head");
  }
}

SoloPolicy::SoloPolicy(std::size_t obs_width, std::size_t act_width, std::size_t hidden,
                       Rng& rng)
    : net_({obs_width, hidden, act_width}, numerics::OutputHead::kTanh, rng) {}

numerics::Mlp& SoloPolicy::mutable_net() {
  if (frozen_) throw FrozenPolicyError("solo policy is frozen");
  return net_;
}

std::string SoloPolicy::hash() const { return numerics::param_hash(net_.params()); }

}  // namespace soco::demos
