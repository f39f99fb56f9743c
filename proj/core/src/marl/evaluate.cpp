#include "soco/marl/evaluate.hpp"

#include <cmath>

#include "soco/error.hpp"

namespace soco::marl {

EvalResult evaluate(const std::vector<const Actor*>& actors, std::size_t n_agents,
                    const envs::SpreadParams& env_params, std::size_t episodes,
                    std::uint64_t seed) {
  if (actors.size() != n_agents) throw ShapeError("evaluate: one actor per agent required");
  if (episodes == 0) throw ConfigError("evaluate: episodes must be positive");
  envs::SpreadWorld env(n_agents, env_params);

  std::vector<std::unique_ptr<Actor>> local;
  for (const Actor* a : actors) local.push_back(a->clone());

  EvalResult result;
  double edit_sum = 0.0;
  std::size_t decisions = 0;
  for (std::size_t e = 0; e < episodes; ++e) {
    auto joint_obs = env.reset(derive_seed(seed, e));
    Rng rng(derive_seed(seed, 0x5eed0000ULL + e));
    for (auto& a : local) a->begin_episode(rng);
    double episode_return = 0.0;
    const std::size_t ow = env.obs_width();
    while (true) {
      std::vector<double> joint_action;
      for (std::size_t i = 0; i < n_agents; ++i) {
        ActDiagnostics diag;
        const std::span<const double> obs(joint_obs.data() + i * ow, ow);
        const auto a = local[i]->act(obs, rng, false, &diag);
        joint_action.insert(joint_action.end(), a.begin(), a.end());
        if (diag.chosen) {
          if (result.chosen_histogram.size() <= *diag.chosen) {
            result.chosen_histogram.resize(*diag.chosen + 1, 0);
          }
          ++result.chosen_histogram[*diag.chosen];
        }
        edit_sum += diag.edit_norm;
        ++decisions;
      }
      const auto outcome = env.step(joint_action);
      episode_return += outcome.reward.total;
      joint_obs = outcome.joint_obs;
      if (outcome.done) break;
    }
    result.episode_returns.push_back(episode_return);
  }

  const double n = static_cast<double>(episodes);
  for (double r : result.episode_returns) result.mean_return += r;
  result.mean_return /= n;
  double var = 0.0;
  for (double r : result.episode_returns) var += (r - result.mean_return) * (r - result.mean_return);
  result.std_return = std::sqrt(var / n);
  result.mean_edit_norm = decisions ? edit_sum / static_cast<double>(decisions) : 0.0;

  std::size_t total = 0;
  for (auto c : result.chosen_histogram) total += c;
  for (auto c : result.chosen_histogram) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    result.gating_entropy -= p * std::log(p);
  }
  return result;
}

}  // namespace soco::marl
