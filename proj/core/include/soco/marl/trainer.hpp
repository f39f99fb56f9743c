#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "soco/decomp/layout.hpp"
#include "soco/demos/solo_policy.hpp"
#include "soco/envs/spread.hpp"
#include "soco/fusion/fused_policy.hpp"
#include "soco/marl/actor.hpp"
#include "soco/marl/critics.hpp"
#include "soco/marl/replay_buffer.hpp"
#include "soco/marl/updates.hpp"

namespace soco::marl {

// Shared off-policy hyperparameters. Defaults are the Spread settings.
struct TrainerConfig {
  double gamma = 0.99;
  std::size_t batch_size = 1000;
  std::size_t hidden = 128;
  double explore_noise = 0.1;
  double policy_noise = 0.2;
  double noise_clip = 0.5;
  std::size_t policy_delay = 2;
  double tau = 0.005;
  double actor_lr = 5e-4;
  double critic_lr = 1e-3;
  std::size_t n_step = 1;
  // Treat the horizon as a truncation (bootstrap through it) instead of a
  // terminal state.
  bool bootstrap_time_limit = true;
  std::size_t buffer_size = 1'000'000;
  std::size_t warmup_steps = 10'000;
  std::size_t total_steps = 300'000;  // environment steps after warm-up
  std::size_t updates_per_step = 1;
  std::size_t eval_interval = 10'000;
  std::size_t eval_episodes = 40;
  std::uint64_t eval_seed = 20'240'917;
  std::uint64_t seed = 0;

  // Throws ConfigError on the first violated constraint.
  void validate() const;
};

enum class PolicyKind { kVanilla, kSoco };

struct MarlSetup {
  std::size_t n_agents = 3;
  envs::SpreadParams env_params;
  PolicyKind kind = PolicyKind::kVanilla;
  fusion::FusionConfig fusion;
  std::optional<decomp::ObservationLayout> layout;  // defaults to spread_layout(n)
  std::shared_ptr<const demos::SoloPolicy> solo;    // required for kSoco, frozen
  TrainerConfig trainer;

  decomp::ObservationLayout resolved_layout() const;
  void validate() const;
};

struct MetricsRow {
  std::size_t step = 0;
  double mean_return = 0.0;
  double std_return = 0.0;
  double critic_loss_1 = 0.0;
  double critic_loss_2 = 0.0;
  double actor_loss = 0.0;
  double mean_edit_norm = 0.0;
  double gating_entropy = 0.0;
};

// Online/target actors, shared twin critics and their optimizers.
struct LearnerState {
  std::vector<std::unique_ptr<Actor>> actors;
  std::vector<std::unique_ptr<Actor>> target_actors;
  std::vector<std::vector<numerics::AdamState>> actor_adam;
  TwinCritics critics;

  std::vector<const Actor*> actor_views() const;
  std::vector<const Actor*> target_views() const;
};

// Builds freshly initialized learner state for `setup`.
LearnerState make_learner(const MarlSetup& setup, Rng& init_rng);

// Step-wise MATD3 loop (the N = 1 instance is TD3). Warm-up fills the buffer
// with uniform random actions; each later environment step acts with
// exploration noise, stores the transition and runs `updates_per_step`
// critic updates, with actor and target updates every `policy_delay`
// critic updates.
class MarlTrainer {
 public:
  explicit MarlTrainer(MarlSetup setup);

  const MarlSetup& setup() const { return setup_; }
  LearnerState& learner() { return learner_; }
  const LearnerState& learner() const { return learner_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  std::size_t env_steps() const { return env_steps_; }
  std::size_t critic_updates() const { return critic_updates_; }
  std::size_t actor_updates() const { return actor_updates_; }

  void warmup();
  // One environment step plus its updates.
  void train_step();
  // One critic update (and delayed actor/target update) from a sampled batch.
  void update();
  // Evaluates the online actors and drains the loss accumulators.
  MetricsRow evaluate_now(std::size_t step);

 private:
  void act_and_store(bool random_actions);

  MarlSetup setup_;
  Rng init_rng_;
  Rng act_rng_;
  Rng update_rng_;
  std::uint64_t episode_seed_base_;
  std::uint64_t episode_ = 0;
  envs::SpreadWorld env_;
  LearnerState learner_;
  ReplayBuffer buffer_;
  std::vector<double> joint_obs_;
  std::vector<double> aux_;
  std::size_t env_steps_ = 0;
  std::size_t critic_updates_ = 0;
  std::size_t actor_updates_ = 0;

  double sum_c1_ = 0.0, sum_c2_ = 0.0, sum_actor_ = 0.0;
  std::size_t n_critic_ = 0, n_actor_ = 0;
};

struct TrainResult {
  std::vector<MetricsRow> history;
  LearnerState learner;
  std::string solo_hash_before;
  std::string solo_hash_after;
  std::size_t critic_updates = 0;
  std::size_t actor_updates = 0;
};

using MetricsCallback = std::function<void(const MetricsRow&)>;

// Warm-up, post-warm-up evaluation (step 0), then `total_steps` training steps
// with an evaluation every `eval_interval` steps.
TrainResult train_marl(const MarlSetup& setup, const MetricsCallback& on_eval = {});

}  // namespace soco::marl
