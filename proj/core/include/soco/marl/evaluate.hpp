#pragma once

#include <cstdint>
#include <vector>

#include "soco/envs/spread.hpp"
#include "soco/marl/actor.hpp"

namespace soco::marl {

struct EvalResult {
  double mean_return = 0.0;
  double std_return = 0.0;  // population std over episodes
  double mean_edit_norm = 0.0;
  double gating_entropy = 0.0;  // nats, of the pooled chosen-index histogram
  std::vector<std::size_t> chosen_histogram;
  std::vector<double> episode_returns;
};

// Deterministic rollouts (no exploration noise, argmax gating) of clones of
// `actors` over `episodes` fresh worlds. Episode e is reset from
// derive_seed(seed, e), so a fixed seed always replays the same worlds.
EvalResult evaluate(const std::vector<const Actor*>& actors, std::size_t n_agents,
                    const envs::SpreadParams& env_params, std::size_t episodes,
                    std::uint64_t seed);

}  // namespace soco::marl
