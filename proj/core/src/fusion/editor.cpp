#include "soco/fusion/editor.hpp"

#include "soco/error.hpp"
#include "soco/fusion/clip.hpp"

namespace soco::fusion {

ActionEditor::ActionEditor(std::size_t obs_width, std::size_t hidden, std::size_t act_width,
                           double strength, Rng& rng)
    : net_({obs_width, hidden, act_width}, numerics::OutputHead::kIdentity, rng),
      strength_(strength) {
  if (!(strength >= 0.0)) throw ConfigError("editor strength L must be >= 0");
}

std::vector<double> edit_action(const ActionEditor& editor, std::span<const double> obs) {
  std::vector<double> delta(editor.net().output_width(), 0.0);
  if (editor.strength() == 0.0) return delta;
  const auto raw = editor.net().forward(numerics::Tensor({1, obs.size()},
                                                         {obs.begin(), obs.end()}));
  for (std::size_t j = 0; j < delta.size(); ++j) {
    delta[j] = bounded_residual(raw[j], editor.strength());
  }
  return delta;
}

}  // namespace soco::fusion
