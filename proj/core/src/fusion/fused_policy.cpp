#include "soco/fusion/fused_policy.hpp"

#include <cmath>

#include "soco/error.hpp"

namespace soco::fusion {

numerics::Tensor candidate_actions(const demos::SoloPolicy& solo,
                                   const numerics::Tensor& views) {
  if (views.cols() != solo.obs_width()) {
    throw ShapeError("candidate_actions: view width does not match solo policy");
  }
  return solo.act(views);
}

FusedPolicy::FusedPolicy(std::shared_ptr<const demos::SoloPolicy> solo,
                         decomp::ObservationLayout layout, FusionConfig config,
                         std::size_t agent_index, Rng& rng)
    : solo_(std::move(solo)),
      layout_(std::move(layout)),
      config_(config),
      agent_index_(agent_index) {
  if (!solo_) throw ConfigError("fused policy needs a solo policy");
  layout_.validate();
  if (layout_.solo_view_width != solo_->obs_width()) {
    throw ShapeError("fused policy: solo view width does not match solo policy input");
  }
  gate_ = GatingSelector(obs_width(), config_.hidden, candidate_count(), config_.gating,
                         config_.gumbel_temperature, rng);
  editor_ = ActionEditor(obs_width(), config_.hidden, act_width(), config_.strength, rng);
}

void FusedPolicy::begin_episode(Rng& rng) {
  if (config_.gating == GatingMode::kEpisodeRandom) {
    episode_pick_ = uniform_index(rng, candidate_count());
  }
}

numerics::Tensor FusedPolicy::candidates_batch(const numerics::Tensor& obs) const {
  if (obs.cols() != obs_width()) throw ShapeError("candidates_batch: observation width");
  const std::size_t b = obs.rows(), g = candidate_count(), vw = layout_.solo_view_width;
  numerics::Tensor views = numerics::Tensor::matrix(b * g, vw);
  for (std::size_t r = 0; r < b; ++r) {
    const auto v = decomp::build_solo_views(obs.row(r), layout_);
    std::copy(v.begin(), v.end(), views.raw() + r * g * vw);
  }
  auto actions = candidate_actions(*solo_, views);
  return numerics::Tensor({b, g * act_width()},
                          std::vector<double>(actions.data().begin(), actions.data().end()));
}

numerics::Tensor FusedPolicy::forward_batch(const numerics::Tensor& obs,
                                            const numerics::Tensor& candidates, Rng& rng,
                                            bool train, FusionTape& tape) const {
  const std::size_t b = obs.rows(), g = candidate_count(), aw = act_width();
  if (obs.cols() != obs_width() || candidates.rows() != b || candidates.cols() != g * aw) {
    throw ShapeError("fused forward_batch: shape mismatch");
  }
  const double strength = config_.strength;
  tape.candidates = candidates;
  tape.soft_weights = numerics::Tensor::matrix(b, g);
  tape.chosen.assign(b, 0);
  tape.learned_gate = config_.gating == GatingMode::kLearned;

  if (tape.learned_gate) {
    const auto logits = gate_.net().forward(obs, tape.gate);
    std::vector<double> row(g);
    for (std::size_t r = 0; r < b; ++r) {
      for (std::size_t k = 0; k < g; ++k) row[k] = logits(r, k) + (train ? gumbel(rng) : 0.0);
      const auto w = softmax(row, gate_.temperature());
      std::copy(w.begin(), w.end(), tape.soft_weights.row(r).begin());
      tape.chosen[r] = argmax(w);
    }
  } else {
    for (std::size_t r = 0; r < b; ++r) {
      std::size_t pick = 0;
      switch (config_.gating) {
        case GatingMode::kFixed: pick = agent_index_ % g; break;
        case GatingMode::kRandom:
        case GatingMode::kEpisodeRandom: pick = uniform_index(rng, g); break;
        case GatingMode::kLearned: break;
      }
      tape.chosen[r] = pick;
      tape.soft_weights(r, pick) = 1.0;
    }
  }

  tape.raw_residual = numerics::Tensor();
  if (strength > 0.0) tape.raw_residual = editor_.net().forward(obs, tape.editor);

  tape.pre_clip = numerics::Tensor::matrix(b, aw);
  numerics::Tensor out = numerics::Tensor::matrix(b, aw);
  for (std::size_t r = 0; r < b; ++r) {
    for (std::size_t j = 0; j < aw; ++j) {
      double x = candidates(r, tape.chosen[r] * aw + j);
      if (strength > 0.0) x += bounded_residual(tape.raw_residual(r, j), strength);
      tape.pre_clip(r, j) = x;
      out(r, j) = clip_value(x, config_.clip, strength);
    }
  }
  return out;
}

void FusedPolicy::backward_batch(const FusionTape& tape, const numerics::Tensor& d_action,
                                 numerics::ParamSet* gate_grads,
                                 numerics::ParamSet* editor_grads) const {
  const std::size_t b = tape.pre_clip.rows(), g = candidate_count(), aw = act_width();
  if (d_action.rows() != b || d_action.cols() != aw) {
    throw ShapeError("fused backward_batch: gradient shape mismatch");
  }
  const double strength = config_.strength;
  numerics::Tensor d_pre = numerics::Tensor::matrix(b, aw);
  for (std::size_t r = 0; r < b; ++r) {
    for (std::size_t j = 0; j < aw; ++j) {
      d_pre(r, j) = d_action(r, j) * clip_derivative(tape.pre_clip(r, j), config_.clip, strength);
    }
  }

  if (gate_grads && tape.learned_gate) {
    // Straight-through: d/d(soft weight k) of <w, candidates> is candidate k.
    const double inv_tau = 1.0 / gate_.temperature();
    numerics::Tensor d_logits = numerics::Tensor::matrix(b, g);
    std::vector<double> d_w(g);
    for (std::size_t r = 0; r < b; ++r) {
      double weighted = 0.0;
      for (std::size_t k = 0; k < g; ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j < aw; ++j) s += d_pre(r, j) * tape.candidates(r, k * aw + j);
        d_w[k] = s;
        weighted += tape.soft_weights(r, k) * s;
      }
      for (std::size_t k = 0; k < g; ++k) {
        d_logits(r, k) = inv_tau * tape.soft_weights(r, k) * (d_w[k] - weighted);
      }
    }
    gate_.net().backward(tape.gate, d_logits, gate_grads, nullptr);
  }

  if (editor_grads && strength > 0.0) {
    numerics::Tensor d_raw = numerics::Tensor::matrix(b, aw);
    for (std::size_t r = 0; r < b; ++r) {
      for (std::size_t j = 0; j < aw; ++j) {
        d_raw(r, j) = d_pre(r, j) * bounded_residual_derivative(tape.raw_residual(r, j), strength);
      }
    }
    editor_.net().backward(tape.editor, d_raw, editor_grads, nullptr);
  }
}

FusedAction fused_act(const FusedPolicy& policy, std::span<const double> obs, Rng& rng,
                      bool train) {
  const auto& layout = policy.layout();
  const auto views = decomp::build_solo_views(obs, layout);
  const auto candidates = candidate_actions(
      policy.solo(), numerics::Tensor({layout.view_count(), layout.solo_view_width}, views));
  const auto selection = gate_select(policy.gate(), obs, candidates, rng, train,
                                     policy.gate_context());
  FusedAction out;
  out.residual = edit_action(policy.editor(), obs);
  out.selected = selection.action;
  out.soft_weights = selection.soft_weights;
  out.chosen = selection.chosen;
  out.action = fuse(out.selected, out.residual, policy.config().clip, policy.config().strength);
  double sq = 0.0;
  for (double d : out.residual) sq += d * d;
  out.edit_norm = std::sqrt(sq);
  return out;
}

}  // namespace soco::fusion
