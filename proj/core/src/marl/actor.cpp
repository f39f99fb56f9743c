#include "soco/marl/actor.hpp"

#include "soco/error.hpp"

namespace soco::marl {
namespace {

struct MlpActorTape : ActorTape {
  numerics::MlpTape mlp;
};

struct FusedActorTape : ActorTape {
  fusion::FusionTape fusion;
};

numerics::Tensor row_tensor(std::span<const double> obs) {
  return numerics::Tensor({1, obs.size()}, std::vector<double>(obs.begin(), obs.end()));
}

}  // namespace

numerics::Tensor Actor::compute_aux(const numerics::Tensor& obs) const {
  return numerics::Tensor::matrix(obs.rows(), 0);
}

std::vector<const numerics::Mlp*> Actor::const_nets() const {
  std::vector<const numerics::Mlp*> out;
  for (const auto& n : const_cast<Actor*>(this)->nets()) out.push_back(n.net);
  return out;
}

numerics::Tensor column_slice(const numerics::Tensor& m, std::size_t col, std::size_t width) {
  if (col + width > m.cols()) throw ShapeError("column_slice out of range");
  const std::size_t rows = m.rows();
  numerics::Tensor out = numerics::Tensor::matrix(rows, width);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto src = m.row(r).subspan(col, width);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

MlpActor::MlpActor(std::size_t obs_width, std::size_t act_width, std::size_t hidden, Rng& rng)
    : net_({obs_width, hidden, act_width}, numerics::OutputHead::kTanh, rng) {}

MlpActor::MlpActor(numerics::Mlp net) : net_(std::move(net)) {}

std::unique_ptr<Actor> MlpActor::clone() const { return std::make_unique<MlpActor>(*this); }

std::vector<double> MlpActor::act(std::span<const double> obs, Rng& /*rng*/, bool /*train*/,
                                  ActDiagnostics* diag) const {
  const auto out = net_.forward(row_tensor(obs));
  if (diag) *diag = {};
  return {out.data().begin(), out.data().end()};
}

numerics::Tensor MlpActor::forward_batch(const numerics::Tensor& obs,
                                         const numerics::Tensor& /*aux*/, Rng& /*rng*/,
                                         bool /*train*/,
                                         std::unique_ptr<ActorTape>& tape) const {
  auto t = std::make_unique<MlpActorTape>();
  auto out = net_.forward(obs, t->mlp);
  tape = std::move(t);
  return out;
}

std::vector<numerics::ParamSet> MlpActor::backward_batch(const ActorTape& tape,
                                                         const numerics::Tensor& d_action) const {
  const auto& t = dynamic_cast<const MlpActorTape&>(tape);
  auto grads = numerics::zeros_like(net_.params());
  net_.backward(t.mlp, d_action, &grads, nullptr);
  return {std::move(grads)};
}

FusedActor::FusedActor(fusion::FusedPolicy policy) : policy_(std::move(policy)) {}

std::unique_ptr<Actor> FusedActor::clone() const { return std::make_unique<FusedActor>(*this); }

std::size_t FusedActor::aux_width() const {
  return policy_.candidate_count() * policy_.act_width();
}

numerics::Tensor FusedActor::compute_aux(const numerics::Tensor& obs) const {
  return policy_.candidates_batch(obs);
}

std::vector<double> FusedActor::act(std::span<const double> obs, Rng& rng, bool train,
                                    ActDiagnostics* diag) const {
  auto fused = fusion::fused_act(policy_, obs, rng, train);
  if (diag) {
    diag->chosen = fused.chosen;
    diag->edit_norm = fused.edit_norm;
  }
  return std::move(fused.action);
}

numerics::Tensor FusedActor::forward_batch(const numerics::Tensor& obs,
                                           const numerics::Tensor& aux, Rng& rng, bool train,
                                           std::unique_ptr<ActorTape>& tape) const {
  auto t = std::make_unique<FusedActorTape>();
  numerics::Tensor out = aux.size() == 0
                             ? policy_.forward_batch(obs, policy_.candidates_batch(obs), rng,
                                                     train, t->fusion)
                             : policy_.forward_batch(obs, aux, rng, train, t->fusion);
  tape = std::move(t);
  return out;
}

std::vector<NamedNet> FusedActor::nets() {
  std::vector<NamedNet> out = {{"gate", &policy_.gate().net()}};
  if (policy_.config().strength > 0.0) out.push_back({"editor", &policy_.editor().net()});
  return out;
}

std::vector<numerics::ParamSet> FusedActor::backward_batch(
    const ActorTape& tape, const numerics::Tensor& d_action) const {
  const auto& t = dynamic_cast<const FusedActorTape&>(tape);
  auto gate_grads = numerics::zeros_like(policy_.gate().net().params());
  if (policy_.config().strength == 0.0) {
    policy_.backward_batch(t.fusion, d_action, &gate_grads, nullptr);
    return {std::move(gate_grads)};
  }
  auto editor_grads = numerics::zeros_like(policy_.editor().net().params());
  policy_.backward_batch(t.fusion, d_action, &gate_grads, &editor_grads);
  return {std::move(gate_grads), std::move(editor_grads)};
}

}  // namespace soco::marl

namespace soco::marl {

std::vector<double> UniformRandomActor::act(std::span<const double> /*obs*/, Rng& rng,
                                            bool /*train*/, ActDiagnostics* diag) const {
  if (diag) *diag = {};
  std::vector<double> a(act_width_);
  for (double& v : a) v = uniform(rng, -1.0, 1.0);
  return a;
}

numerics::Tensor UniformRandomActor::forward_batch(const numerics::Tensor& obs,
                                                   const numerics::Tensor& /*aux*/, Rng& rng,
                                                   bool /*train*/,
                                                   std::unique_ptr<ActorTape>& tape) const {
  numerics::Tensor out = numerics::Tensor::matrix(obs.rows(), act_width_);
  for (double& v : out.data()) v = uniform(rng, -1.0, 1.0);
  tape = std::make_unique<ActorTape>();
  return out;
}

std::vector<numerics::ParamSet> UniformRandomActor::backward_batch(
    const ActorTape& /*tape*/, const numerics::Tensor& /*d_action*/) const {
  return {};
}

}  // namespace soco::marl
