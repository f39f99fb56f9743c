#pragma once

#include <optional>
#include <span>
#include <vector>

#include "soco/fusion/clip.hpp"
#include "soco/numerics/mlp.hpp"

namespace soco::fusion {

// Per-agent selector over G candidate solo actions. In learned mode an MLP
// maps the agent's cooperative observation to G logits; the rule-based modes
// ignore the network.
class GatingSelector {
 public:
  GatingSelector() = default;
  GatingSelector(std::size_t obs_width, std::size_t hidden, std::size_t candidates,
                 GatingMode mode, double temperature, Rng& rng);

  std::size_t candidate_count() const { return net_.output_width(); }
  GatingMode mode() const { return mode_; }
  double temperature() const { return temperature_; }
  const numerics::Mlp& net() const { return net_; }
  numerics::Mlp& net() { return net_; }

 private:
  numerics::Mlp net_;
  GatingMode mode_ = GatingMode::kLearned;
  double temperature_ = 1.0;
};

// Inputs the rule-based modes depend on.
struct GateContext {
  std::size_t agent_index = 0;             // fixed gating picks this (mod G)
  std::optional<std::size_t> episode_pick;  // episode-wise random gating
};

struct GateSelection {
  std::vector<double> action;        // the selected candidate row
  std::vector<double> soft_weights;  // relaxed weights (one-hot for rule modes)
  std::size_t chosen = 0;
};

// Straight-through Gumbel-Softmax selection. Learned/train: w =
// softmax((logits + g) / tau) with g ~ Gumbel(0, 1) (or `forced_noise`), the
// output is the argmax row of `candidates`. Learned/eval: argmax(logits), no
// noise. `candidates` is [G, act_width].
GateSelection gate_select(const GatingSelector& gate, std::span<const double> obs,
                          const numerics::Tensor& candidates, Rng& rng, bool train,
                          const GateContext& context = {},
                          std::optional<std::span<const double>> forced_noise = std::nullopt);

}  // namespace soco::fusion
