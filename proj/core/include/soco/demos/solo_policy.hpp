#pragma once

#include <string>

#include "soco/numerics/mlp.hpp"

namespace soco::demos {

// The shared solo policy: observation -> action through a tanh-headed MLP.
// Once frozen its parameters never change again; trainers must not own an
// optimizer for it.
class SoloPolicy {
 public:
  SoloPolicy() = default;
  explicit SoloPolicy(numerics::Mlp net);
  SoloPolicy(std::size_t obs_width, std::size_t act_width, std::size_t hidden, Rng& rng);

  const numerics::Mlp& net() const { return net_; }
  // Mutable access for training; throws FrozenPolicyError once frozen.
  numerics::Mlp& mutable_net();

  std::size_t obs_width() const { return net_.input_width(); }
  std::size_t act_width() const { return net_.output_width(); }

  numerics::Tensor act(const numerics::Tensor& obs) const { return net_.forward(obs); }

  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }
  std::string hash() const;

 private:
  numerics::Mlp net_;
  bool frozen_ = false;
};

}  // namespace soco::demos
