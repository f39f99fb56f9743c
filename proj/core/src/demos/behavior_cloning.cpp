#include "soco/demos/behavior_cloning.hpp"

#include "soco/error.hpp"

namespace soco::demos {
namespace {

void check_batch(const SoloPolicy& policy, const numerics::Tensor& obs,
                 const numerics::Tensor& actions) {
  if (obs.cols() != policy.obs_width() || actions.cols() != policy.act_width() ||
      obs.rows() != actions.rows()) {
    throw ShapeError("behavior cloning: batch width mismatch");
  }
  if (obs.rows() == 0) throw ShapeError("behavior cloning: empty batch");
}

}  // namespace

double bc_loss(const SoloPolicy& policy, const numerics::Tensor& obs,
               const numerics::Tensor& actions) {
  check_batch(policy, obs, actions);
  const auto pred = policy.act(obs);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - actions[i];
    sum += d * d;
  }
  return sum / static_cast<double>(obs.rows());
}

double bc_update(SoloPolicy& policy, numerics::AdamState& adam, const numerics::Tensor& obs,
                 const numerics::Tensor& actions) {
  if (policy.frozen()) throw FrozenPolicyError("bc_update on a frozen solo policy");
  check_batch(policy, obs, actions);
  auto& net = policy.mutable_net();
  numerics::MlpTape tape;
  const auto pred = net.forward(obs, tape);
  const double scale = 2.0 / static_cast<double>(obs.rows());
  numerics::Tensor upstream(pred.shape());
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - actions[i];
    sum += d * d;
    upstream[i] = scale * d;
  }
  auto grads = numerics::zeros_like(net.params());
  net.backward(tape, upstream, &grads, nullptr);
  numerics::adam_step(net.params(), grads, adam);
  return sum / static_cast<double>(obs.rows());
}

BcReport train_bc(SoloPolicy& policy, const DemoDataset& data, const BcConfig& config,
                  std::uint64_t seed) {
  if (data.size() == 0) throw ConfigError("train_bc: empty demonstration dataset");
  if (data.obs_width != policy.obs_width() || data.act_width != policy.act_width()) {
    throw ShapeError("train_bc: dataset width does not match policy");
  }
  if (config.batch_size == 0) throw ConfigError("train_bc: batch size must be positive");
  Rng rng(seed);
  numerics::AdamState adam(policy.net().params(), {.learning_rate = config.learning_rate});
  BcReport report;
  report.loss_curve.reserve(config.steps);
  const std::size_t ow = data.obs_width, aw = data.act_width, b = config.batch_size;
  numerics::Tensor obs = numerics::Tensor::matrix(b, ow);
  numerics::Tensor act = numerics::Tensor::matrix(b, aw);
  for (std::size_t step = 0; step < config.steps; ++step) {
    for (std::size_t r = 0; r < b; ++r) {
      const std::size_t idx = uniform_index(rng, data.size());
      for (std::size_t c = 0; c < ow; ++c) obs(r, c) = data.observations[idx * ow + c];
      for (std::size_t c = 0; c < aw; ++c) act(r, c) = data.actions[idx * aw + c];
    }
    report.loss_curve.push_back(bc_update(policy, adam, obs, act));
  }
  if (!report.loss_curve.empty()) {
    report.initial_loss = report.loss_curve.front();
    report.final_loss = report.loss_curve.back();
  }
  return report;
}

}  // namespace soco::demos
