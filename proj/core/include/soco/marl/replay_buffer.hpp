#pragma once

#include <cstddef>
#include <vector>

#include "soco/numerics/rng.hpp"
#include "soco/numerics/tensor.hpp"

namespace soco::marl {

struct Transition {
  std::vector<double> state;
  std::vector<double> joint_obs;
  std::vector<double> joint_action;
  double reward = 0.0;
  std::vector<double> next_state;
  std::vector<double> next_joint_obs;
  bool done = false;
  // Episode cut by the time limit: the window stops here but still bootstraps.
  bool truncated = false;
  // Cached frozen features of joint_obs / next_joint_obs (may be empty).
  std::vector<double> aux;
  std::vector<double> next_aux;
};

struct ReplayLayout {
  std::size_t state_width = 0;
  std::size_t obs_width = 0;  // joint observation width
  std::size_t act_width = 0;  // joint action width
  std::size_t aux_width = 0;  // joint aux width
};

// A sampled minibatch with n-step returns folded in. `discount` is gamma^n
// for bootstrapped rows and 0 for rows whose window hit an episode end.
struct Batch {
  numerics::Tensor states;
  numerics::Tensor joint_obs;
  numerics::Tensor joint_actions;
  numerics::Tensor aux;
  numerics::Tensor returns;   // [B, 1]
  numerics::Tensor next_states;
  numerics::Tensor next_joint_obs;
  numerics::Tensor next_aux;
  numerics::Tensor discounts;  // [B, 1]
  numerics::Tensor dones;      // [B, 1]

  std::size_t size() const { return returns.rows(); }
};

// FIFO ring buffer; observations, states, actions and aux are stored as
// 32-bit floats, rewards at 64-bit.
class ReplayBuffer {
 public:
  ReplayBuffer(ReplayLayout layout, std::size_t capacity);

  const ReplayLayout& layout() const { return layout_; }
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }

  void push(const Transition& t);
  // Logical index 0 is the oldest stored transition.
  Transition at(std::size_t index) const;

  // Uniform sample over complete n-step windows. A window starting at t sums
  // gamma^k r_{t+k} for k < n, stopping early at a done flag (bootstrap
  // disabled) or a truncated flag (bootstrap kept); otherwise it bootstraps
  // from next_state of t+n-1.
  Batch sample(std::size_t batch_size, std::size_t n_step, double gamma, Rng& rng) const;
  // Same window logic for explicit logical start indices.
  Batch gather(const std::vector<std::size_t>& starts, std::size_t n_step, double gamma) const;

 private:
  std::size_t physical(std::size_t logical) const;
  bool window_complete(std::size_t logical, std::size_t n_step) const;

  ReplayLayout layout_;
  std::size_t capacity_;
  std::size_t head_ = 0;  // next physical slot to write
  std::size_t size_ = 0;
  std::vector<float> state_, obs_, action_, aux_, next_state_, next_obs_, next_aux_;
  std::vector<double> reward_;
  std::vector<unsigned char> done_;  // bit 0 done, bit 1 truncated
};

}  // namespace soco::marl
