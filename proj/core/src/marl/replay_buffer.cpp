#include "soco/marl/replay_buffer.hpp"

#include <cmath>
#include <string>

#include "soco/error.hpp"

namespace soco::marl {
namespace {

void store(std::vector<float>& dst, std::size_t slot, std::size_t width,
           const std::vector<double>& src, const char* what) {
  if (src.size() != width) {
    throw ShapeError(std::string("replay push: ") + what + " width " +
                     std::to_string(src.size()) + ", expected " + std::to_string(width));
  }
  for (std::size_t i = 0; i < width; ++i) {
    if (!std::isfinite(src[i])) throw NonFiniteError(std::string("replay push: ") + what);
    dst[slot * width + i] = static_cast<float>(src[i]);
  }
}

std::vector<double> load(const std::vector<float>& src, std::size_t slot, std::size_t width) {
  return std::vector<double>(src.begin() + static_cast<std::ptrdiff_t>(slot * width),
                             src.begin() + static_cast<std::ptrdiff_t>((slot + 1) * width));
}

void copy_row(numerics::Tensor& dst, std::size_t row, const std::vector<float>& src,
              std::size_t slot, std::size_t width) {
  for (std::size_t i = 0; i < width; ++i) dst(row, i) = src[slot * width + i];
}

}  // namespace

ReplayBuffer::ReplayBuffer(ReplayLayout layout, std::size_t capacity)
    : layout_(layout), capacity_(capacity) {
  if (capacity == 0) throw ConfigError("replay capacity must be positive");
}

std::size_t ReplayBuffer::physical(std::size_t logical) const {
  const std::size_t oldest = (head_ + capacity_ - size_) % capacity_;
  return (oldest + logical) % capacity_;
}

void ReplayBuffer::push(const Transition& t) {
  const auto& l = layout_;
  // Storage grows with the buffer until it reaches capacity.
  if (size_ < capacity_ && head_ == size_) {
    const std::size_t slots = size_ + 1;
    state_.resize(slots * l.state_width);
    next_state_.resize(slots * l.state_width);
    obs_.resize(slots * l.obs_width);
    next_obs_.resize(slots * l.obs_width);
    action_.resize(slots * l.act_width);
    aux_.resize(slots * l.aux_width);
    next_aux_.resize(slots * l.aux_width);
    reward_.resize(slots);
    done_.resize(slots);
  }
  if (!std::isfinite(t.reward)) throw NonFiniteError("replay push: reward");
  for (double a : t.joint_action) {
    if (a < -1.0 || a > 1.0) throw Error("replay push: action outside [-1, 1]");
  }
  const std::size_t slot = head_;
  store(state_, slot, l.state_width, t.state, "state");
  store(next_state_, slot, l.state_width, t.next_state, "next_state");
  store(obs_, slot, l.obs_width, t.joint_obs, "joint_obs");
  store(next_obs_, slot, l.obs_width, t.next_joint_obs, "next_joint_obs");
  store(action_, slot, l.act_width, t.joint_action, "joint_action");
  store(aux_, slot, l.aux_width, t.aux, "aux");
  store(next_aux_, slot, l.aux_width, t.next_aux, "next_aux");
  reward_[slot] = t.reward;
  done_[slot] = static_cast<unsigned char>((t.done ? 1 : 0) | (t.truncated ? 2 : 0));
  head_ = (head_ + 1) % capacity_;
  if (size_ < capacity_) ++size_;
}

Transition ReplayBuffer::at(std::size_t index) const {
  if (index >= size_) throw Error("replay index out of range");
  const std::size_t p = physical(index);
  const auto& l = layout_;
  Transition t;
  t.state = load(state_, p, l.state_width);
  t.next_state = load(next_state_, p, l.state_width);
  t.joint_obs = load(obs_, p, l.obs_width);
  t.next_joint_obs = load(next_obs_, p, l.obs_width);
  t.joint_action = load(action_, p, l.act_width);
  t.aux = load(aux_, p, l.aux_width);
  t.next_aux = load(next_aux_, p, l.aux_width);
  t.reward = reward_[p];
  t.done = (done_[p] & 1) != 0;
  t.truncated = (done_[p] & 2) != 0;
  return t;
}

bool ReplayBuffer::window_complete(std::size_t logical, std::size_t n_step) const {
  for (std::size_t k = 0; k < n_step; ++k) {
    const std::size_t idx = logical + k;
    if (idx >= size_) return false;
    if (done_[physical(idx)]) return true;
  }
  return true;
}

Batch ReplayBuffer::sample(std::size_t batch_size, std::size_t n_step, double gamma,
                           Rng& rng) const {
  if (n_step == 0) throw ConfigError("n_step must be >= 1");
  if (size_ < batch_size || batch_size == 0) {
    throw Error("replay sample: insufficient data (" + std::to_string(size_) + " < " +
                std::to_string(batch_size) + ")");
  }
  std::vector<std::size_t> starts;
  starts.reserve(batch_size);
  std::size_t rejections = 0;
  while (starts.size() < batch_size) {
    const std::size_t idx = uniform_index(rng, size_);
    if (window_complete(idx, n_step)) {
      starts.push_back(idx);
    } else if (++rejections > 1000 * batch_size) {
      throw Error("replay sample: no complete n-step windows");
    }
  }
  return gather(starts, n_step, gamma);
}

Batch ReplayBuffer::gather(const std::vector<std::size_t>& starts, std::size_t n_step,
                           double gamma) const {
  const auto& l = layout_;
  const std::size_t b = starts.size();
  Batch batch;
  batch.states = numerics::Tensor::matrix(b, l.state_width);
  batch.next_states = numerics::Tensor::matrix(b, l.state_width);
  batch.joint_obs = numerics::Tensor::matrix(b, l.obs_width);
  batch.next_joint_obs = numerics::Tensor::matrix(b, l.obs_width);
  batch.joint_actions = numerics::Tensor::matrix(b, l.act_width);
  batch.aux = numerics::Tensor::matrix(b, l.aux_width);
  batch.next_aux = numerics::Tensor::matrix(b, l.aux_width);
  batch.returns = numerics::Tensor::matrix(b, 1);
  batch.discounts = numerics::Tensor::matrix(b, 1);
  batch.dones = numerics::Tensor::matrix(b, 1);
  for (std::size_t r = 0; r < b; ++r) {
    const std::size_t start = starts[r];
    if (!window_complete(start, n_step)) throw Error("replay gather: incomplete window");
    const std::size_t p0 = physical(start);
    copy_row(batch.states, r, state_, p0, l.state_width);
    copy_row(batch.joint_obs, r, obs_, p0, l.obs_width);
    copy_row(batch.joint_actions, r, action_, p0, l.act_width);
    copy_row(batch.aux, r, aux_, p0, l.aux_width);

    double ret = 0.0, discount = 1.0;
    bool done = false;
    std::size_t last = p0;
    for (std::size_t k = 0; k < n_step; ++k) {
      last = physical(start + k);
      ret += discount * reward_[last];
      discount *= gamma;
      if (done_[last]) {
        done = (done_[last] & 1) != 0;
        break;
      }
    }
    batch.returns(r, 0) = ret;
    batch.discounts(r, 0) = done ? 0.0 : discount;
    batch.dones(r, 0) = done ? 1.0 : 0.0;
    copy_row(batch.next_states, r, next_state_, last, l.state_width);
    copy_row(batch.next_joint_obs, r, next_obs_, last, l.obs_width);
    copy_row(batch.next_aux, r, next_aux_, last, l.aux_width);
  }
  return batch;
}

}  // namespace soco::marl
