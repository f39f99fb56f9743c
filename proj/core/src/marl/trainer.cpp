#include "soco/marl/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "soco/error.hpp"
#include "soco/marl/evaluate.hpp"

namespace soco::marl {

void TrainerConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("trainer: ") + what);
  };
  require(gamma > 0.0 && gamma <= 1.0, "gamma must be in (0, 1]");
  require(batch_size > 0, "batch_size must be positive");
  require(hidden > 0, "hidden must be positive");
  require(explore_noise >= 0.0, "explore_noise must be >= 0");
  require(policy_noise >= 0.0, "policy_noise must be >= 0");
  require(noise_clip >= 0.0, "noise_clip must be >= 0");
  require(policy_delay >= 1, "policy_delay must be >= 1");
  require(tau >= 0.0 && tau <= 1.0, "tau must be in [0, 1]");
  require(actor_lr > 0.0 && critic_lr > 0.0, "learning rates must be positive");
  require(n_step >= 1, "n_step must be >= 1");
  require(buffer_size >= batch_size, "buffer_size must be >= batch_size");
  require(updates_per_step >= 1, "updates_per_step must be >= 1");
  require(eval_interval >= 1, "eval_interval must be >= 1");
  require(eval_episodes >= 1, "eval_episodes must be >= 1");
}

decomp::ObservationLayout MarlSetup::resolved_layout() const {
  return layout ? *layout : decomp::spread_layout(n_agents);
}

void MarlSetup::validate() const {
  trainer.validate();
  if (n_agents == 0) throw ConfigError("setup: n_agents must be positive");
  if (kind == PolicyKind::kSoco) {
    if (!solo) throw ConfigError("setup: SoCo runs require a solo policy");
    if (!solo->frozen()) throw ConfigError("setup: solo policy must be frozen");
    if (!(fusion.strength >= 0.0)) throw ConfigError("setup: L must be >= 0");
    if (!(fusion.gumbel_temperature > 0.0)) {
      throw ConfigError("setup: gumbel temperature must be positive");
    }
    const auto l = resolved_layout();
    l.validate();
    envs::SpreadWorld probe(n_agents, env_params);
    if (l.observation_width() != probe.obs_width()) {
      throw ConfigError("setup: layout width does not match the environment observation");
    }
    if (l.solo_view_width != solo->obs_width()) {
      throw ConfigError("setup: solo view width does not match the solo policy");
    }
  }
}

std::vector<const Actor*> LearnerState::actor_views() const {
  std::vector<const Actor*> out;
  for (const auto& a : actors) out.push_back(a.get());
  return out;
}

std::vector<const Actor*> LearnerState::target_views() const {
  std::vector<const Actor*> out;
  for (const auto& a : target_actors) out.push_back(a.get());
  return out;
}

LearnerState make_learner(const MarlSetup& setup, Rng& init_rng) {
  setup.validate();
  const envs::SpreadWorld probe(setup.n_agents, setup.env_params);
  const std::size_t ow = probe.obs_width(), aw = envs::SpreadWorld::act_width();
  const auto& tc = setup.trainer;
  LearnerState learner;
  for (std::size_t i = 0; i < setup.n_agents; ++i) {
    std::unique_ptr<Actor> actor;
    if (setup.kind == PolicyKind::kSoco) {
      auto fcfg = setup.fusion;
      fcfg.hidden = tc.hidden;
      actor = std::make_unique<FusedActor>(
          fusion::FusedPolicy(setup.solo, setup.resolved_layout(), fcfg, i, init_rng));
    } else {
      actor = std::make_unique<MlpActor>(ow, aw, tc.hidden, init_rng);
    }
    std::vector<numerics::AdamState> adam;
    for (const auto& net : actor->nets()) {
      adam.emplace_back(net.net->params(), numerics::AdamConfig{.learning_rate = tc.actor_lr});
    }
    learner.target_actors.push_back(actor->clone());
    learner.actors.push_back(std::move(actor));
    learner.actor_adam.push_back(std::move(adam));
  }
  learner.critics = TwinCritics(probe.state_width(), setup.n_agents * aw, tc.hidden,
                                tc.critic_lr, init_rng);
  return learner;
}

namespace {

ReplayLayout replay_layout(const envs::SpreadWorld& env, const LearnerState& learner) {
  std::size_t aux = 0;
  for (const auto& a : learner.actors) aux += a->aux_width();
  return {env.state_width(), env.n_agents() * env.obs_width(),
          env.n_agents() * envs::SpreadWorld::act_width(), aux};
}

}  // namespace

MarlTrainer::MarlTrainer(MarlSetup setup)
    : setup_(std::move(setup)),
      init_rng_(derive_seed(setup_.trainer.seed, 4)),
      act_rng_(derive_seed(setup_.trainer.seed, 2)),
      update_rng_(derive_seed(setup_.trainer.seed, 3)),
      episode_seed_base_(derive_seed(setup_.trainer.seed, 1)),
      env_(setup_.n_agents, setup_.env_params),
      learner_(make_learner(setup_, init_rng_)),
      buffer_(replay_layout(env_, learner_),
              std::min(setup_.trainer.buffer_size,
                       setup_.trainer.warmup_steps + setup_.trainer.total_steps + 1)) {}

void MarlTrainer::act_and_store(bool random_actions) {
  const std::size_t n = env_.n_agents(), ow = env_.obs_width();
  const std::size_t aw = envs::SpreadWorld::act_width();
  if (joint_obs_.empty()) {
    joint_obs_ = env_.reset(derive_seed(episode_seed_base_, episode_++));
    for (auto& a : learner_.actors) a->begin_episode(act_rng_);
    aux_.clear();
  }
  auto joint_aux = [&](const std::vector<double>& joint_obs) {
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& actor = *learner_.actors[i];
      if (actor.aux_width() == 0) continue;
      const numerics::Tensor obs({1, ow}, std::vector<double>(joint_obs.begin() + static_cast<std::ptrdiff_t>(i * ow),
                                                                  joint_obs.begin() + static_cast<std::ptrdiff_t>((i + 1) * ow)));
      const auto aux = actor.compute_aux(obs);
      out.insert(out.end(), aux.data().begin(), aux.data().end());
    }
    return out;
  };
  if (aux_.empty()) aux_ = joint_aux(joint_obs_);

  Transition t;
  t.state = env_.global_state();
  t.joint_obs = joint_obs_;
  t.aux = aux_;
  t.joint_action.reserve(n * aw);
  for (std::size_t i = 0; i < n; ++i) {
    if (random_actions) {
      for (std::size_t j = 0; j < aw; ++j) t.joint_action.push_back(uniform(act_rng_, -1.0, 1.0));
    } else {
      const std::span<const double> obs(joint_obs_.data() + i * ow, ow);
      const auto a = learner_.actors[i]->act(obs, act_rng_, true, nullptr);
      for (double v : a) {
        const double noisy = v + normal(act_rng_, 0.0, setup_.trainer.explore_noise);
        t.joint_action.push_back(std::clamp(noisy, -1.0, 1.0));
      }
    }
  }
  const auto outcome = env_.step(t.joint_action);
  t.reward = outcome.reward.total;
  t.next_state = env_.global_state();
  t.next_joint_obs = outcome.joint_obs;
  t.next_aux = joint_aux(outcome.joint_obs);
  t.done = outcome.done && !setup_.trainer.bootstrap_time_limit;
  t.truncated = outcome.done && setup_.trainer.bootstrap_time_limit;
  buffer_.push(t);
  ++env_steps_;

  if (outcome.done) {
    joint_obs_.clear();
    aux_.clear();
  } else {
    joint_obs_ = outcome.joint_obs;
    aux_ = t.next_aux;
  }
}

void MarlTrainer::warmup() {
  for (std::size_t s = 0; s < setup_.trainer.warmup_steps; ++s) act_and_store(true);
}

void MarlTrainer::update() {
  const auto& tc = setup_.trainer;
  if (buffer_.size() < tc.batch_size) return;
  const Batch batch = buffer_.sample(tc.batch_size, tc.n_step, tc.gamma, update_rng_);
  const auto y = critic_target(batch, learner_.critics, learner_.target_views(),
                               {tc.policy_noise, tc.noise_clip}, update_rng_);
  const auto [l1, l2] = critic_update(learner_.critics, batch, y);
  sum_c1_ += l1;
  sum_c2_ += l2;
  ++n_critic_;
  ++critic_updates_;

  if (critic_updates_ % tc.policy_delay != 0) return;
  for (std::size_t i = 0; i < learner_.actors.size(); ++i) {
    sum_actor_ += actor_update(i, *learner_.actors[i], learner_.actor_adam[i],
                               learner_.critics.q1, batch, update_rng_);
    ++n_actor_;
  }
  ++actor_updates_;
  auto& c = learner_.critics;
  soft_update(c.target1.params(), c.q1.params(), tc.tau);
  soft_update(c.target2.params(), c.q2.params(), tc.tau);
  for (std::size_t i = 0; i < learner_.actors.size(); ++i) {
    auto online = learner_.actors[i]->nets();
    auto target = learner_.target_actors[i]->nets();
    for (std::size_t k = 0; k < online.size(); ++k) {
      soft_update(target[k].net->params(), online[k].net->params(), tc.tau);
    }
  }
}

void MarlTrainer::train_step() {
  act_and_store(false);
  for (std::size_t u = 0; u < setup_.trainer.updates_per_step; ++u) update();
}

MetricsRow MarlTrainer::evaluate_now(std::size_t step) {
  const auto& tc = setup_.trainer;
  const auto eval = evaluate(learner_.actor_views(), setup_.n_agents, setup_.env_params,
                             tc.eval_episodes, tc.eval_seed);
  MetricsRow row;
  row.step = step;
  row.mean_return = eval.mean_return;
  row.std_return = eval.std_return;
  row.critic_loss_1 = n_critic_ ? sum_c1_ / static_cast<double>(n_critic_) : 0.0;
  row.critic_loss_2 = n_critic_ ? sum_c2_ / static_cast<double>(n_critic_) : 0.0;
  row.actor_loss = n_actor_ ? sum_actor_ / static_cast<double>(n_actor_) : 0.0;
  row.mean_edit_norm = eval.mean_edit_norm;
  row.gating_entropy = eval.gating_entropy;
  sum_c1_ = sum_c2_ = sum_actor_ = 0.0;
  n_critic_ = n_actor_ = 0;
  return row;
}

TrainResult train_marl(const MarlSetup& setup, const MetricsCallback& on_eval) {
  MarlTrainer trainer(setup);
  TrainResult result;
  if (setup.solo) result.solo_hash_before = setup.solo->hash();
  auto record = [&](std::size_t step) {
    result.history.push_back(trainer.evaluate_now(step));
    if (on_eval) on_eval(result.history.back());
  };
  trainer.warmup();
  record(0);
  const auto& tc = setup.trainer;
  for (std::size_t step = 1; step <= tc.total_steps; ++step) {
    trainer.train_step();
    if (step % tc.eval_interval == 0) record(step);
  }
  if (setup.solo) result.solo_hash_after = setup.solo->hash();
  result.critic_updates = trainer.critic_updates();
  result.actor_updates = trainer.actor_updates();
  result.learner = std::move(trainer.learner());
  return result;
}

}  // namespace soco::marl
