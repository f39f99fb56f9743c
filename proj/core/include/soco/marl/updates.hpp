#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "soco/marl/actor.hpp"
#include "soco/marl/critics.hpp"
#include "soco/marl/replay_buffer.hpp"
#include "soco/numerics/adam.hpp"

namespace soco::marl {

struct SmoothingNoise {
  double stddev = 0.2;
  double clip = 0.5;
};

// clip(N(0, stddev^2), -clip, clip) draws, shaped [rows, cols].
numerics::Tensor smoothing_noise(std::size_t rows, std::size_t cols, const SmoothingNoise& noise,
                                 Rng& rng);

// Bootstrap target y = R + discount * min_k Qbar_k(s', a'), where
// a'_i = clamp(target_actor_i(o'_i) + eps, -1, 1). Target actors act without
// gate sampling. `forced_noise` ([B, joint act], pre-clip) replaces the
// Gaussian draw when given.
numerics::Tensor critic_target(const Batch& batch, const TwinCritics& critics,
                               const std::vector<const Actor*>& target_actors,
                               const SmoothingNoise& noise, Rng& rng,
                               const numerics::Tensor* forced_noise = nullptr);

// One Adam step on each critic towards the same y; returns the two
// pre-update mean-squared losses.
std::pair<double, double> critic_update(TwinCritics& critics, const Batch& batch,
                                        const numerics::Tensor& y);

struct ActorGradient {
  double loss = 0.0;
  std::vector<numerics::ParamSet> grads;  // per actor.nets()
};

// -mean Q1(s, a) with agent `agent`'s slot replaced by its current policy
// output (gate sampled); the other slots come from the batch.
ActorGradient actor_gradient(std::size_t agent, const Actor& actor, const numerics::Mlp& q1,
                             const Batch& batch, Rng& rng);

// actor_gradient followed by one Adam step per actor network.
double actor_update(std::size_t agent, Actor& actor, std::vector<numerics::AdamState>& adam,
                    const numerics::Mlp& q1, const Batch& batch, Rng& rng);

}  // namespace soco::marl
