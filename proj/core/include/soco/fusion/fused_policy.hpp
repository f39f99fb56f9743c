#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "soco/decomp/layout.hpp"
#include "soco/demos/solo_policy.hpp"
#include "soco/fusion/clip.hpp"
#include "soco/fusion/editor.hpp"
#include "soco/fusion/gating.hpp"

namespace soco::fusion {

struct FusionConfig {
  double strength = 0.0;  // L
  GatingMode gating = GatingMode::kLearned;
  ClipMode clip = ClipMode::kTanh;
  double gumbel_temperature = 1.0;
  std::size_t hidden = 128;
};

// Row k is solo(view k); `views` is [G, solo_view_width].
numerics::Tensor candidate_actions(const demos::SoloPolicy& solo,
                                   const numerics::Tensor& views);

struct FusedAction {
  std::vector<double> action;
  std::vector<double> selected;  // gated solo action
  std::vector<double> residual;  // editor output
  std::vector<double> soft_weights;
  std::size_t chosen = 0;
  double edit_norm = 0.0;  // ||residual||_2
};

// Activations of a batched training-mode forward pass.
struct FusionTape {
  numerics::MlpTape gate;
  numerics::MlpTape editor;
  numerics::Tensor soft_weights;  // [B, G]
  std::vector<std::size_t> chosen;
  numerics::Tensor candidates;    // [B, G * act]
  numerics::Tensor raw_residual;  // [B, act]; empty when L == 0
  numerics::Tensor pre_clip;      // [B, act]
  bool learned_gate = false;
};

// One agent's fused policy: frozen shared solo policy, gating selector,
// action editor and clip operator.
class FusedPolicy {
 public:
  FusedPolicy(std::shared_ptr<const demos::SoloPolicy> solo, decomp::ObservationLayout layout,
              FusionConfig config, std::size_t agent_index, Rng& rng);

  const demos::SoloPolicy& solo() const { return *solo_; }
  std::shared_ptr<const demos::SoloPolicy> shared_solo() const { return solo_; }
  const decomp::ObservationLayout& layout() const { return layout_; }
  const FusionConfig& config() const { return config_; }
  std::size_t agent_index() const { return agent_index_; }
  std::size_t obs_width() const { return layout_.observation_width(); }
  std::size_t act_width() const { return solo_->act_width(); }
  std::size_t candidate_count() const { return layout_.view_count(); }

  GatingSelector& gate() { return gate_; }
  const GatingSelector& gate() const { return gate_; }
  ActionEditor& editor() { return editor_; }
  const ActionEditor& editor() const { return editor_; }

  // Draws the episode-wise target for episode-random gating.
  void begin_episode(Rng& rng);
  GateContext gate_context() const { return {agent_index_, episode_pick_}; }

  // Solo candidates for a batch of observations: [B, G * act].
  numerics::Tensor candidates_batch(const numerics::Tensor& obs) const;

  // Batched fused action. `candidates` must come from candidates_batch (or
  // a cache of it). Episode-random gating draws per row here since replayed
  // rows carry no episode identity.
  numerics::Tensor forward_batch(const numerics::Tensor& obs, const numerics::Tensor& candidates,
                                 Rng& rng, bool train, FusionTape& tape) const;

  // Gradients of a scalar loss given dL/d(action). Gradients flow through the
  // soft gate weights (straight-through) and the editor; the solo policy
  // receives none. Either output may be null.
  void backward_batch(const FusionTape& tape, const numerics::Tensor& d_action,
                      numerics::ParamSet* gate_grads, numerics::ParamSet* editor_grads) const;

 private:
  std::shared_ptr<const demos::SoloPolicy> solo_;
  decomp::ObservationLayout layout_;
  FusionConfig config_;
  std::size_t agent_index_;
  GatingSelector gate_;
  ActionEditor editor_;
  std::optional<std::size_t> episode_pick_;
};

// Observation -> solo views -> candidates -> gate -> editor -> clip.
FusedAction fused_act(const FusedPolicy& policy, std::span<const double> obs, Rng& rng,
                      bool train);

}  // namespace soco::fusion
