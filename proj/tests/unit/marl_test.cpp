#include <doctest.h>

#include <cmath>
#include <memory>

#include "soco/decomp/layout.hpp"
#include "soco/error.hpp"
#include "soco/marl/actor.hpp"
#include "soco/marl/critics.hpp"
#include "soco/marl/evaluate.hpp"
#include "soco/marl/replay_buffer.hpp"
#include "soco/marl/trainer.hpp"
#include "soco/marl/updates.hpp"
#include "soco/numerics/finite_diff.hpp"

using namespace soco;
using namespace soco::marl;
using numerics::Mlp;
using numerics::OutputHead;
using numerics::Tensor;

namespace {

Transition scalar_transition(double index, double reward, bool done) {
  Transition t;
  t.state = {index, 0.0};
  t.joint_obs = {index, 1.0};
  t.joint_action = {0.5};
  t.reward = reward;
  t.next_state = {index + 1.0, 0.0};
  t.next_joint_obs = {index + 1.0, 1.0};
  t.done = done;
  return t;
}

ReplayBuffer scalar_buffer(std::size_t capacity) {
  return ReplayBuffer({.state_width = 2, .obs_width = 2, .act_width = 1}, capacity);
}

Mlp constant_net(std::size_t in, std::size_t hidden, double value) {
  auto net = Mlp::zeros({in, hidden, 1}, OutputHead::kIdentity);
  net.params()[5][0] = value;
  return net;
}

// Q(s, a) = relu(a_0), reading the first action column after `state_width` inputs.
Mlp relu_of_action(std::size_t state_width, std::size_t act_width, std::size_t hidden) {
  auto net = Mlp::zeros({state_width + act_width, hidden, 1}, OutputHead::kIdentity);
  net.params()[0](state_width, 0) = 1.0;
  net.params()[2](0, 0) = 1.0;
  net.params()[4](0, 0) = 1.0;
  return net;
}

void randomize(Tensor& t, Rng& rng, double scale = 1.0) {
  for (double& v : t.data()) v = uniform(rng, -scale, scale);
}

std::shared_ptr<const demos::SoloPolicy> frozen_solo(std::uint64_t seed, std::size_t hidden = 16) {
  Rng rng(seed);
  auto solo = std::make_shared<demos::SoloPolicy>(6, 2, hidden, rng);
  solo->freeze();
  return solo;
}

TrainerConfig tiny_trainer() {
  TrainerConfig c;
  c.batch_size = 8;
  c.hidden = 16;
  c.buffer_size = 2000;
  c.warmup_steps = 50;
  c.total_steps = 40;
  c.eval_interval = 20;
  c.eval_episodes = 2;
  return c;
}

MarlSetup tiny_setup(PolicyKind kind, std::size_t n_agents = 2) {
  MarlSetup s;
  s.n_agents = n_agents;
  s.kind = kind;
  s.trainer = tiny_trainer();
  s.fusion.hidden = 16;
  s.fusion.strength = 0.2;
  if (kind == PolicyKind::kSoco) s.solo = frozen_solo(77);
  return s;
}

}  // namespace

TEST_CASE("replay: one-step window") {
  auto buf = scalar_buffer(16);
  for (int i = 0; i < 4; ++i) buf.push(scalar_transition(i, 0.25 * (i + 1), false));
  const auto b = buf.gather({1}, 1, 0.99);
  CHECK(b.returns(0, 0) == 0.5);
  CHECK(b.discounts(0, 0) == 0.99);
  CHECK(b.states(0, 0) == 1.0);
  CHECK(b.next_states(0, 0) == 2.0);
}

TEST_CASE("replay: ten-step return of unit rewards") {
  auto buf = scalar_buffer(32);
  for (int i = 0; i < 12; ++i) buf.push(scalar_transition(i, 1.0, false));
  const auto b = buf.gather({0}, 10, 0.99);
  CHECK(std::abs(b.returns(0, 0) - 9.561792499119551) < 1e-12);
  CHECK(std::abs(b.discounts(0, 0) - std::pow(0.99, 10)) < 1e-15);
  CHECK(b.next_states(0, 0) == 10.0);
  CHECK(b.dones(0, 0) == 0.0);
}

TEST_CASE("replay: episode end truncates the window") {
  auto buf = scalar_buffer(32);
  for (int i = 0; i < 12; ++i) buf.push(scalar_transition(i, 1.0, i == 2));
  const auto b = buf.gather({0}, 10, 0.99);
  CHECK(std::abs(b.returns(0, 0) - 2.9701) < 1e-12);
  CHECK(b.discounts(0, 0) == 0.0);
  CHECK(b.dones(0, 0) == 1.0);
}

TEST_CASE("replay: a time-limit cut stops the window but keeps the bootstrap") {
  auto buf = scalar_buffer(32);
  for (int i = 0; i < 12; ++i) {
    auto t = scalar_transition(i, 1.0, false);
    t.truncated = i == 2;
    buf.push(t);
  }
  const auto b = buf.gather({0}, 10, 0.99);
  CHECK(std::abs(b.returns(0, 0) - 2.9701) < 1e-12);
  CHECK(std::abs(b.discounts(0, 0) - 0.970299) < 1e-15);
  CHECK(b.dones(0, 0) == 0.0);
  CHECK(b.next_states(0, 0) == 3.0);
  CHECK(buf.at(2).truncated);
  CHECK_FALSE(buf.at(2).done);
}

TEST_CASE("replay: sampling skips incomplete windows") {
  auto buf = scalar_buffer(32);
  for (int i = 0; i < 5; ++i) buf.push(scalar_transition(i, 1.0, false));
  Rng rng(1);
  bool saw[3] = {};
  for (int draw = 0; draw < 50; ++draw) {
    const auto b = buf.sample(4, 3, 0.99, rng);
    for (std::size_t r = 0; r < b.size(); ++r) {
      const double start = b.states(r, 0);
      REQUIRE(start <= 2.0);
      saw[static_cast<int>(start)] = true;
    }
  }
  CHECK((saw[0] && saw[1] && saw[2]));
  CHECK_THROWS_AS(buf.sample(4, 6, 0.99, rng), Error);
}

TEST_CASE("replay: FIFO eviction and float storage") {
  auto buf = scalar_buffer(3);
  for (int i = 0; i < 5; ++i) buf.push(scalar_transition(i, i, false));
  CHECK(buf.size() == 3);
  CHECK(buf.at(0).state[0] == 2.0);
  CHECK(buf.at(2).reward == 4.0);
  auto t = scalar_transition(0, 0.1, false);
  t.state[1] = 0.1;
  buf.push(t);
  CHECK(buf.at(2).state[1] == static_cast<double>(0.1f));
  CHECK(buf.at(2).reward == 0.1);
  CHECK_THROWS_AS(buf.push(Transition{}), ShapeError);
}

TEST_CASE("critic target oracles") {
  Rng rng(2);
  TwinCritics critics(2, 1, 8, 1e-3, rng);
  critics.target1 = constant_net(3, 8, 2.0);
  critics.target2 = constant_net(3, 8, 3.0);
  MlpActor zero_actor(Mlp::zeros({2, 8, 1}, OutputHead::kTanh));
  const std::vector<const Actor*> targets = {&zero_actor};
  const Tensor no_noise = Tensor::matrix(1, 1);

  auto buf = scalar_buffer(8);
  buf.push(scalar_transition(0, 1.0, false));
  buf.push(scalar_transition(1, 1.0, true));

  const auto y = critic_target(buf.gather({0}, 1, 0.99), critics, targets, {}, rng, &no_noise);
  CHECK(std::abs(y(0, 0) - 2.98) < 1e-12);
  const auto y_end = critic_target(buf.gather({1}, 1, 0.99), critics, targets, {}, rng, &no_noise);
  CHECK(y_end(0, 0) == 1.0);

  SUBCASE("smoothing noise is clipped before it reaches the target action") {
    critics.target1 = relu_of_action(2, 1, 8);
    const Tensor plus = Tensor::matrix(1, 1, 0.7), minus = Tensor::matrix(1, 1, -0.7);
    const auto batch = buf.gather({0}, 1, 0.99);
    CHECK(std::abs(critic_target(batch, critics, targets, {}, rng, &plus)(0, 0) - 1.495) < 1e-12);
    CHECK(critic_target(batch, critics, targets, {}, rng, &minus)(0, 0) == 1.0);
  }
}

TEST_CASE("smoothing noise stays inside the clip") {
  Rng rng(3);
  const auto eps = smoothing_noise(100, 4, {.stddev = 5.0, .clip = 0.5}, rng);
  bool saturated = false;
  for (double v : eps.data()) {
    CHECK(std::abs(v) <= 0.5);
    saturated = saturated || std::abs(v) == 0.5;
  }
  CHECK(saturated);
}

TEST_CASE("twin target is the elementwise minimum") {
  Rng rng(4);
  TwinCritics critics(4, 2, 16, 1e-3, rng);
  Rng actor_rng(5);
  MlpActor a0(3, 1, 16, actor_rng), a1(3, 1, 16, actor_rng);
  const std::vector<const Actor*> targets = {&a0, &a1};

  ReplayBuffer buf({.state_width = 4, .obs_width = 6, .act_width = 2}, 64);
  for (int i = 0; i < 20; ++i) {
    Transition t;
    t.state.resize(4);
    t.next_state.resize(4);
    t.joint_obs.resize(6);
    t.next_joint_obs.resize(6);
    t.joint_action.resize(2);
    for (auto* v : {&t.state, &t.next_state, &t.joint_obs, &t.next_joint_obs, &t.joint_action}) {
      for (double& x : *v) x = uniform(rng, -1, 1);
    }
    t.reward = uniform(rng, -2, 0);
    buf.push(t);
  }
  const auto batch = buf.gather({0, 3, 7, 11, 19}, 1, 0.99);
  Tensor noise = Tensor::matrix(5, 2);
  randomize(noise, rng, 0.3);

  const auto y = critic_target(batch, critics, targets, {}, rng, &noise);
  auto only1 = critics, only2 = critics;
  only1.target2 = only1.target1;
  only2.target1 = only2.target2;
  const auto y1 = critic_target(batch, only1, targets, {}, rng, &noise);
  const auto y2 = critic_target(batch, only2, targets, {}, rng, &noise);
  for (std::size_t r = 0; r < 5; ++r) CHECK(y(r, 0) == std::min(y1(r, 0), y2(r, 0)));
}

TEST_CASE("critic loss oracles") {
  Rng rng(6);
  SUBCASE("zero critic against y = 2.98") {
    TwinCritics critics(2, 1, 8, 1e-3, rng);
    critics.q1 = Mlp::zeros({3, 8, 1}, OutputHead::kIdentity);
    critics.q2 = Mlp::zeros({3, 8, 1}, OutputHead::kIdentity);
    auto buf = scalar_buffer(4);
    buf.push(scalar_transition(0, 1.0, false));
    const auto [l1, l2] = critic_update(critics, buf.gather({0}, 1, 0.99), Tensor::matrix(1, 1, 2.98));
    CHECK(std::abs(l1 - 8.8804) < 1e-12);
    CHECK(std::abs(l2 - 8.8804) < 1e-12);
  }
  SUBCASE("five transitions against a per-row mean") {
    TwinCritics critics(2, 1, 8, 1e-3, rng);
    auto buf = scalar_buffer(8);
    for (int i = 0; i < 5; ++i) buf.push(scalar_transition(i * 0.25, 0.0, false));
    const auto batch = buf.gather({0, 1, 2, 3, 4}, 1, 0.99);
    Tensor y = Tensor::matrix(5, 1);
    randomize(y, rng, 3.0);
    double expected1 = 0.0, expected2 = 0.0;
    for (std::size_t r = 0; r < 5; ++r) {
      const Tensor in({1, 3}, {batch.states(r, 0), batch.states(r, 1), batch.joint_actions(r, 0)});
      expected1 += std::pow(critics.q1.forward(in)[0] - y(r, 0), 2) / 5.0;
      expected2 += std::pow(critics.q2.forward(in)[0] - y(r, 0), 2) / 5.0;
    }
    const auto [l1, l2] = critic_update(critics, batch, y);
    CHECK(std::abs(l1 - expected1) < 1e-10);
    CHECK(std::abs(l2 - expected2) < 1e-10);
  }
}

TEST_CASE("critic update never touches target networks") {
  Rng rng(7);
  TwinCritics a(2, 1, 8, 1e-3, rng);
  auto b = a;
  randomize(b.target1.params()[0], rng);
  randomize(b.target2.params()[4], rng);
  const auto targets_before = b.target1.params();

  auto buf = scalar_buffer(8);
  for (int i = 0; i < 4; ++i) buf.push(scalar_transition(i, 1.0, false));
  const auto batch = buf.gather({0, 1, 2}, 1, 0.99);
  const Tensor y = Tensor::from_rows({{1.0}, {-0.5}, {0.25}});
  critic_update(a, batch, y);
  critic_update(b, batch, y);
  CHECK(a.q1.params() == b.q1.params());
  CHECK(a.q2.params() == b.q2.params());
  CHECK(b.target1.params() == targets_before);
}

TEST_CASE("soft update") {
  numerics::ParamSet target = {Tensor::from_rows({{1.0, 2.0}})};
  const numerics::ParamSet online = {Tensor::from_rows({{3.0, -4.0}})};
  auto t0 = target;
  soft_update(t0, online, 0.0);
  CHECK(t0 == target);
  auto t1 = target;
  soft_update(t1, online, 1.0);
  CHECK(t1 == online);
  auto t = target;
  soft_update(t, online, 0.005);
  CHECK(std::abs(t[0][0] - (0.995 * 1.0 + 0.005 * 3.0)) < 1e-15);
  CHECK(std::abs(t[0][1] - (0.995 * 2.0 - 0.005 * 4.0)) < 1e-15);
}

namespace {

// Two-agent toy batch: state width 4, per-agent observation 3, action 2.
Batch toy_batch(std::size_t rows, Rng& rng) {
  Batch b;
  b.states = Tensor::matrix(rows, 4);
  b.joint_obs = Tensor::matrix(rows, 6);
  b.joint_actions = Tensor::matrix(rows, 4);
  randomize(b.states, rng);
  randomize(b.joint_obs, rng);
  randomize(b.joint_actions, rng);
  b.returns = Tensor::matrix(rows, 1);
  return b;
}

}  // namespace

TEST_CASE("actor gradient matches finite differences") {
  Rng rng(8);
  const auto batch = toy_batch(6, rng);
  const Mlp q1({8, 16, 1}, OutputHead::kIdentity, rng);
  const MlpActor actor(3, 2, 16, rng);

  Rng r0(1);
  const auto g = actor_gradient(1, actor, q1, batch, r0);
  auto objective = [&](std::span<const double> flat) {
    Mlp net = actor.net();
    std::size_t off = 0;
    for (auto& t : net.params()) {
      for (double& v : t.data()) v = flat[off++];
    }
    Rng r(1);
    return actor_gradient(1, MlpActor(net), q1, batch, r).loss;
  };
  const auto fd = numerics::finite_diff_grad(objective, numerics::flatten(actor.net().params()), 1e-6);
  REQUIRE(g.grads.size() == 1);
  CHECK(numerics::max_relative_error(numerics::flatten(g.grads[0]), fd, 1e-6) < 1e-3);
}

TEST_CASE("fused actor: editor gradient matches finite differences") {
  Rng rng(9);
  const auto solo = frozen_solo(10);
  fusion::FusionConfig cfg{.strength = 0.5, .hidden = 16};
  FusedActor actor(fusion::FusedPolicy(solo, decomp::spread_layout(3), cfg, 0, rng));
  Batch batch;
  batch.states = Tensor::matrix(5, 18);
  batch.joint_obs = Tensor::matrix(5, 42);
  batch.joint_actions = Tensor::matrix(5, 6);
  randomize(batch.states, rng);
  randomize(batch.joint_obs, rng, 1.5);
  randomize(batch.joint_actions, rng);
  batch.returns = Tensor::matrix(5, 1);
  const Mlp q1({24, 16, 1}, OutputHead::kIdentity, rng);

  Rng r0(2);
  const auto g = actor_gradient(0, actor, q1, batch, r0);
  REQUIRE(g.grads.size() == 2);
  auto objective = [&](std::span<const double> flat) {
    FusedActor probe = actor;
    std::size_t off = 0;
    for (auto& t : probe.policy().editor().net().params()) {
      for (double& v : t.data()) v = flat[off++];
    }
    Rng r(2);
    return actor_gradient(0, probe, q1, batch, r).loss;
  };
  const auto fd = numerics::finite_diff_grad(
      objective, numerics::flatten(actor.policy().editor().net().params()), 1e-6);
  CHECK(numerics::max_relative_error(numerics::flatten(g.grads[1]), fd, 1e-6) < 1e-3);

  SUBCASE("L=0 lists only the gate") {
    FusedActor off(fusion::FusedPolicy(solo, decomp::spread_layout(3), {.hidden = 16}, 0, rng));
    const auto nets = off.nets();
    REQUIRE(nets.size() == 1);
    CHECK(nets[0].name == "gate");
    Rng r(3);
    const auto g0 = actor_gradient(0, off, q1, batch, r);
    double norm = 0.0;
    for (double v : numerics::flatten(g0.grads[0])) norm += v * v;
    CHECK(norm > 0.0);
  }
}

TEST_CASE("constant critic gives zero actor gradient") {
  Rng rng(11);
  const auto batch = toy_batch(4, rng);
  const MlpActor actor(3, 2, 16, rng);
  const Mlp flat = constant_net(8, 16, 5.0);
  const auto g = actor_gradient(0, actor, flat, batch, rng);
  CHECK(g.loss == -5.0);
  for (double v : numerics::flatten(g.grads[0])) CHECK(v == 0.0);
}

TEST_CASE("policy delay and target updates") {
  MarlTrainer trainer(tiny_setup(PolicyKind::kVanilla));
  trainer.warmup();
  CHECK(trainer.critic_updates() == 0);
  for (std::size_t k = 1; k <= 6; ++k) {
    const auto target_before = trainer.learner().critics.target1.params();
    const auto actor_target_before = trainer.learner().target_actors[0]->const_nets()[0]->params();
    trainer.update();
    CHECK(trainer.critic_updates() == k);
    CHECK(trainer.actor_updates() == k / 2);
    const bool actor_step = k % 2 == 0;
    CHECK((trainer.learner().critics.target1.params() != target_before) == actor_step);
    CHECK((trainer.learner().target_actors[0]->const_nets()[0]->params() != actor_target_before) ==
          actor_step);
  }
}

TEST_CASE("evaluation is deterministic") {
  Rng rng(12);
  MlpActor a(14, 2, 16, rng), b(14, 2, 16, rng), c(14, 2, 16, rng);
  const std::vector<const Actor*> actors = {&a, &b, &c};
  const auto r1 = evaluate(actors, 3, {}, 5, 42);
  const auto r2 = evaluate(actors, 3, {}, 5, 42);
  CHECK(r1.episode_returns == r2.episode_returns);
  CHECK(r1.episode_returns.size() == 5);
  CHECK(evaluate(actors, 3, {}, 5, 43).episode_returns != r1.episode_returns);
  CHECK(evaluate(actors, 3, {}, 1, 42).std_return == 0.0);
  CHECK_THROWS_AS(evaluate({&a, &b}, 3, {}, 5, 42), Error);
}

TEST_CASE("train_marl with no training steps reports only the step-0 row") {
  auto setup = tiny_setup(PolicyKind::kVanilla);
  setup.trainer.total_steps = 0;
  const auto result = train_marl(setup);
  REQUIRE(result.history.size() == 1);
  CHECK(result.history[0].step == 0);
  CHECK(result.critic_updates == 0);
}

TEST_CASE("train_marl is reproducible for a fixed seed") {
  for (auto kind : {PolicyKind::kVanilla, PolicyKind::kSoco}) {
    const auto setup = tiny_setup(kind);
    const auto a = train_marl(setup);
    const auto b = train_marl(setup);
    REQUIRE(a.history.size() == 3);
    CHECK(a.history.back().step == 40);
    for (std::size_t i = 0; i < a.history.size(); ++i) {
      CHECK(a.history[i].mean_return == b.history[i].mean_return);
      CHECK(a.history[i].critic_loss_1 == b.history[i].critic_loss_1);
      CHECK(a.history[i].actor_loss == b.history[i].actor_loss);
    }
    CHECK(a.critic_updates == 40);
    CHECK(a.actor_updates == 20);
    if (kind == PolicyKind::kSoco) {
      CHECK(a.solo_hash_before == a.solo_hash_after);
      CHECK(a.solo_hash_after == setup.solo->hash());
    }
  }
}

TEST_CASE("setup validation") {
  auto s = tiny_setup(PolicyKind::kSoco);
  s.solo.reset();
  CHECK_THROWS_AS(s.validate(), ConfigError);
  auto unfrozen = tiny_setup(PolicyKind::kSoco);
  Rng rng(1);
  unfrozen.solo = std::make_shared<demos::SoloPolicy>(6, 2, 16, rng);
  CHECK_THROWS_AS(unfrozen.validate(), Error);
  auto t = tiny_trainer();
  t.policy_delay = 0;
  CHECK_THROWS_AS(t.validate(), ConfigError);
  t = tiny_trainer();
  t.gamma = 1.5;
  CHECK_THROWS_AS(t.validate(), ConfigError);
}
