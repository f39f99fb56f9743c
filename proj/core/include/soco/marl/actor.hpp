#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "soco/fusion/fused_policy.hpp"
#include "soco/numerics/mlp.hpp"

namespace soco::marl {

struct ActDiagnostics {
  std::optional<std::size_t> chosen;  // gate pick, fused actors only
  double edit_norm = 0.0;
};

struct ActorTape {
  virtual ~ActorTape() = default;
};

struct NamedNet {
  std::string name;
  numerics::Mlp* net;
};

// Decentralized per-agent policy as seen by the trainer. Implementations:
// a plain tanh-headed MLP (the vanilla backbone) and the fused SoCo policy.
class Actor {
 public:
  virtual ~Actor() = default;
  virtual std::unique_ptr<Actor> clone() const = 0;

  virtual std::size_t obs_width() const = 0;
  virtual std::size_t act_width() const = 0;

  // Optional per-observation features that depend only on frozen parameters
  // (solo candidates). The trainer caches them in replay.
  virtual std::size_t aux_width() const { return 0; }
  virtual numerics::Tensor compute_aux(const numerics::Tensor& obs) const;

  virtual void begin_episode(Rng& /*rng*/) {}

  // Single-observation action without exploration noise. `train` enables
  // stochastic gate sampling.
  virtual std::vector<double> act(std::span<const double> obs, Rng& rng, bool train,
                                  ActDiagnostics* diag) const = 0;

  // Batched differentiable forward; `aux` may be empty.
  virtual numerics::Tensor forward_batch(const numerics::Tensor& obs,
                                         const numerics::Tensor& aux, Rng& rng, bool train,
                                         std::unique_ptr<ActorTape>& tape) const = 0;
  // Parameter gradients, one ParamSet per entry of nets(), in order.
  virtual std::vector<numerics::ParamSet> backward_batch(
      const ActorTape& tape, const numerics::Tensor& d_action) const = 0;

  // Learnable networks, in a stable order. The frozen solo policy is never
  // listed here.
  virtual std::vector<NamedNet> nets() = 0;
  std::vector<const numerics::Mlp*> const_nets() const;
};

class MlpActor final : public Actor {
 public:
  MlpActor(std::size_t obs_width, std::size_t act_width, std::size_t hidden, Rng& rng);
  explicit MlpActor(numerics::Mlp net);

  const numerics::Mlp& net() const { return net_; }

  std::unique_ptr<Actor> clone() const override;
  std::size_t obs_width() const override { return net_.input_width(); }
  std::size_t act_width() const override { return net_.output_width(); }
  std::vector<double> act(std::span<const double> obs, Rng& rng, bool train,
                          ActDiagnostics* diag) const override;
  numerics::Tensor forward_batch(const numerics::Tensor& obs, const numerics::Tensor& aux,
                                 Rng& rng, bool train,
                                 std::unique_ptr<ActorTape>& tape) const override;
  std::vector<numerics::ParamSet> backward_batch(const ActorTape& tape,
                                                 const numerics::Tensor& d_action) const override;
  std::vector<NamedNet> nets() override { return {{"actor", &net_}}; }

 private:
  numerics::Mlp net_;
};

class FusedActor final : public Actor {
 public:
  explicit FusedActor(fusion::FusedPolicy policy);

  const fusion::FusedPolicy& policy() const { return policy_; }
  fusion::FusedPolicy& policy() { return policy_; }

  std::unique_ptr<Actor> clone() const override;
  std::size_t obs_width() const override { return policy_.obs_width(); }
  std::size_t act_width() const override { return policy_.act_width(); }
  std::size_t aux_width() const override;
  numerics::Tensor compute_aux(const numerics::Tensor& obs) const override;
  void begin_episode(Rng& rng) override { policy_.begin_episode(rng); }
  std::vector<double> act(std::span<const double> obs, Rng& rng, bool train,
                          ActDiagnostics* diag) const override;
  numerics::Tensor forward_batch(const numerics::Tensor& obs, const numerics::Tensor& aux,
                                 Rng& rng, bool train,
                                 std::unique_ptr<ActorTape>& tape) const override;
  std::vector<numerics::ParamSet> backward_batch(const ActorTape& tape,
                                                 const numerics::Tensor& d_action) const override;
  // The editor is listed only when L > 0; at L = 0 it has no effect on the
  // action and receives no gradient.
  std::vector<NamedNet> nets() override;

 private:
  fusion::FusedPolicy policy_;
};

// Columns [col, col + width) of a row-major matrix.
numerics::Tensor column_slice(const numerics::Tensor& m, std::size_t col, std::size_t width);

}  // namespace soco::marl

namespace soco::marl {

// Uniform random actions in [-1, 1]; inference only.
class UniformRandomActor final : public Actor {
 public:
  UniformRandomActor(std::size_t obs_width, std::size_t act_width)
      : obs_width_(obs_width), act_width_(act_width) {}

  std::unique_ptr<Actor> clone() const override {
    return std::make_unique<UniformRandomActor>(*this);
  }
  std::size_t obs_width() const override { return obs_width_; }
  std::size_t act_width() const override { return act_width_; }
  std::vector<double> act(std::span<const double> obs, Rng& rng, bool train,
                          ActDiagnostics* diag) const override;
  numerics::Tensor forward_batch(const numerics::Tensor& obs, const numerics::Tensor& aux,
                                 Rng& rng, bool train,
                                 std::unique_ptr<ActorTape>& tape) const override;
  std::vector<numerics::ParamSet> backward_batch(const ActorTape& tape,
                                                 const numerics::Tensor& d_action) const override;
  std::vector<NamedNet> nets() override { return {}; }

 private:
  std::size_t obs_width_;
  std::size_t act_width_;
};

}  // namespace soco::marl
