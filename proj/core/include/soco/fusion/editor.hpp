#pragma once

#include <span>
#include <vector>

#include "soco/numerics/mlp.hpp"

namespace soco::fusion {

// Residual correction network with strength L: delta = L * tanh(net(o) / L).
class ActionEditor {
 public:
  ActionEditor() = default;
  ActionEditor(std::size_t obs_width, std::size_t hidden, std::size_t act_width,
               double strength, Rng& rng);

  double strength() const { return strength_; }
  const numerics::Mlp& net() const { return net_; }
  numerics::Mlp& net() { return net_; }

 private:
  numerics::Mlp net_;
  double strength_ = 0.0;
};

// Exact zero vector when L == 0; otherwise |delta_j| < L componentwise.
std::vector<double> edit_action(const ActionEditor& editor, std::span<const double> obs);

}  // namespace soco::fusion
