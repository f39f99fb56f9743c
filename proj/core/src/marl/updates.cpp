#include "soco/marl/updates.hpp"

#include <algorithm>
#include <cmath>

#include "soco/error.hpp"

namespace soco::marl {
namespace {

// Per-agent slice of the joint aux block (empty when nothing is cached).
numerics::Tensor agent_aux(const numerics::Tensor& joint_aux, std::size_t agent,
                           std::size_t n_agents) {
  if (joint_aux.cols() == 0) return numerics::Tensor::matrix(joint_aux.rows(), 0);
  const std::size_t w = joint_aux.cols() / n_agents;
  return column_slice(joint_aux, agent * w, w);
}

}  // namespace

numerics::Tensor smoothing_noise(std::size_t rows, std::size_t cols, const SmoothingNoise& noise,
                                 Rng& rng) {
  numerics::Tensor eps = numerics::Tensor::matrix(rows, cols);
  if (noise.stddev > 0.0) {
    std::normal_distribution<double> dist(0.0, noise.stddev);
    for (double& e : eps.data()) e = std::clamp(dist(rng), -noise.clip, noise.clip);
  }
  return eps;
}

numerics::Tensor critic_target(const Batch& batch, const TwinCritics& critics,
                               const std::vector<const Actor*>& target_actors,
                               const SmoothingNoise& noise, Rng& rng,
                               const numerics::Tensor* forced_noise) {
  const std::size_t b = batch.size();
  const std::size_t n = target_actors.size();
  const std::size_t joint_aw = batch.joint_actions.cols();
  numerics::Tensor next_actions = numerics::Tensor::matrix(b, joint_aw);
  std::size_t obs_col = 0, act_col = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Actor& actor = *target_actors[i];
    const auto obs = column_slice(batch.next_joint_obs, obs_col, actor.obs_width());
    std::unique_ptr<ActorTape> tape;
    const auto a = actor.forward_batch(obs, agent_aux(batch.next_aux, i, n), rng, false, tape);
    for (std::size_t r = 0; r < b; ++r) {
      for (std::size_t j = 0; j < actor.act_width(); ++j) next_actions(r, act_col + j) = a(r, j);
    }
    obs_col += actor.obs_width();
    act_col += actor.act_width();
  }
  if (act_col != joint_aw) throw ShapeError("critic_target: joint action width mismatch");

  numerics::Tensor eps;
  if (forced_noise) {
    if (!forced_noise->same_shape(next_actions)) throw ShapeError("critic_target: noise shape");
    eps = *forced_noise;
    for (double& e : eps.data()) e = std::clamp(e, -noise.clip, noise.clip);
  } else {
    eps = smoothing_noise(b, joint_aw, noise, rng);
  }
  for (std::size_t i = 0; i < next_actions.size(); ++i) {
    next_actions[i] = std::clamp(next_actions[i] + eps[i], -1.0, 1.0);
  }

  const auto input = critic_input(batch.next_states, next_actions);
  const auto t1 = critics.target1.forward(input);
  const auto t2 = critics.target2.forward(input);
  numerics::Tensor y = numerics::Tensor::matrix(b, 1);
  for (std::size_t r = 0; r < b; ++r) {
    y(r, 0) = batch.returns(r, 0) + batch.discounts(r, 0) * std::min(t1(r, 0), t2(r, 0));
  }
  return y;
}

namespace {

double regress(numerics::Mlp& q, numerics::AdamState& adam, const numerics::Tensor& input,
               const numerics::Tensor& y) {
  numerics::MlpTape tape;
  const auto pred = q.forward(input, tape);
  const std::size_t b = y.rows();
  numerics::Tensor upstream = numerics::Tensor::matrix(b, 1);
  double loss = 0.0;
  for (std::size_t r = 0; r < b; ++r) {
    const double d = pred(r, 0) - y(r, 0);
    loss += d * d;
    upstream(r, 0) = 2.0 * d / static_cast<double>(b);
  }
  auto grads = numerics::zeros_like(q.params());
  q.backward(tape, upstream, &grads, nullptr);
  numerics::adam_step(q.params(), grads, adam);
  return loss / static_cast<double>(b);
}

}  // namespace

std::pair<double, double> critic_update(TwinCritics& critics, const Batch& batch,
                                        const numerics::Tensor& y) {
  if (y.rows() != batch.size() || y.cols() != 1) throw ShapeError("critic_update: target shape");
  y.require_finite("critic target");
  const auto input = critic_input(batch.states, batch.joint_actions);
  const double l1 = regress(critics.q1, critics.adam1, input, y);
  const double l2 = regress(critics.q2, critics.adam2, input, y);
  return {l1, l2};
}

ActorGradient actor_gradient(std::size_t agent, const Actor& actor, const numerics::Mlp& q1,
                             const Batch& batch, Rng& rng) {
  const std::size_t b = batch.size();
  const std::size_t ow = actor.obs_width(), aw = actor.act_width();
  const std::size_t n = batch.joint_actions.cols() / aw;
  if (agent >= n) throw ShapeError("actor_gradient: agent index out of range");

  const auto obs = column_slice(batch.joint_obs, agent * ow, ow);
  std::unique_ptr<ActorTape> actor_tape;
  const auto own = actor.forward_batch(obs, agent_aux(batch.aux, agent, n), rng, true, actor_tape);

  numerics::Tensor joint = batch.joint_actions;
  for (std::size_t r = 0; r < b; ++r) {
    for (std::size_t j = 0; j < aw; ++j) joint(r, agent * aw + j) = own(r, j);
  }
  const auto input = critic_input(batch.states, joint);
  numerics::MlpTape q_tape;
  const auto q = q1.forward(input, q_tape);

  ActorGradient out;
  for (std::size_t r = 0; r < b; ++r) out.loss -= q(r, 0);
  out.loss /= static_cast<double>(b);

  numerics::Tensor upstream = numerics::Tensor::matrix(b, 1, -1.0 / static_cast<double>(b));
  numerics::Tensor d_input;
  q1.backward(q_tape, upstream, nullptr, &d_input);
  const auto d_action = column_slice(d_input, batch.states.cols() + agent * aw, aw);
  out.grads = actor.backward_batch(*actor_tape, d_action);
  return out;
}

double actor_update(std::size_t agent, Actor& actor, std::vector<numerics::AdamState>& adam,
                    const numerics::Mlp& q1, const Batch& batch, Rng& rng) {
  auto g = actor_gradient(agent, actor, q1, batch, rng);
  auto nets = actor.nets();
  if (nets.size() != g.grads.size() || adam.size() != nets.size()) {
    throw ShapeError("actor_update: optimizer/network count mismatch");
  }
  for (std::size_t k = 0; k < nets.size(); ++k) {
    numerics::adam_step(nets[k].net->params(), g.grads[k], adam[k]);
  }
  return g.loss;
}

}  // namespace soco::marl
