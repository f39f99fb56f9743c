#include "soco/fusion/gating.hpp"

#include "soco/error.hpp"

namespace soco::fusion {

GatingSelector::GatingSelector(std::size_t obs_width, std::size_t hidden,
                               std::size_t candidates, GatingMode mode, double temperature,
                               Rng& rng)
    : net_({obs_width, hidden, candidates}, numerics::OutputHead::kIdentity, rng),
      mode_(mode),
      temperature_(temperature) {
  if (!(temperature > 0.0)) throw ConfigError("gating temperature must be positive");
}

GateSelection gate_select(const GatingSelector& gate, std::span<const double> obs,
                          const numerics::Tensor& candidates, Rng& rng, bool train,
                          const GateContext& context,
                          std::optional<std::span<const double>> forced_noise) {
  const std::size_t g = candidates.rows();
  if (g == 0 || candidates.size() == 0) throw ShapeError("gate_select: empty candidate set");
  if (g != gate.candidate_count()) {
    throw ShapeError("gate_select: candidate count does not match logit count");
  }
  GateSelection out;
  switch (gate.mode()) {
    case GatingMode::kLearned: {
      const auto logits = gate.net().forward(numerics::Tensor({1, obs.size()},
                                                              {obs.begin(), obs.end()}));
      std::vector<double> perturbed(logits.data().begin(), logits.data().end());
      if (train) {
        if (forced_noise && forced_noise->size() != g) {
          throw ShapeError("gate_select: forced noise width mismatch");
        }
        for (std::size_t k = 0; k < g; ++k) {
          perturbed[k] += forced_noise ? (*forced_noise)[k] : gumbel(rng);
        }
      }
      out.soft_weights = softmax(perturbed, gate.temperature());
      out.chosen = argmax(train ? std::span<const double>(out.soft_weights)
                                : logits.data());
      break;
    }
    case GatingMode::kRandom:
      out.chosen = uniform_index(rng, g);
      break;
    case GatingMode::kEpisodeRandom:
      out.chosen = context.episode_pick ? *context.episode_pick % g : uniform_index(rng, g);
      break;
    case GatingMode::kFixed:
      out.chosen = context.agent_index % g;
      break;
  }
  if (out.soft_weights.empty()) {
    out.soft_weights.assign(g, 0.0);
    out.soft_weights[out.chosen] = 1.0;
  }
  const auto row = candidates.row(out.chosen);
  out.action.assign(row.begin(), row.end());
  return out;
}

}  // namespace soco::fusion
