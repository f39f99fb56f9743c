#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace soco::envs {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

double distance(Vec2 a, Vec2 b);

// Physical constants of the particle world. Defaults are the documented
// configuration; see docs/environment.md.
struct SpreadParams {
  double damping = 0.25;
  double dt = 0.1;
  double mass = 1.0;
  double agent_radius = 0.15;
  double landmark_radius = 0.05;
  int horizon = 25;
  double spawn_extent = 1.0;  // positions drawn from [-extent, extent]^2
  int max_placement_attempts = 1000;
};

struct SpreadState {
  std::vector<Vec2> positions;
  std::vector<Vec2> velocities;
  std::vector<Vec2> landmarks;
  int t = 0;
  friend bool operator==(const SpreadState&, const SpreadState&) = default;
};

struct RewardBreakdown {
  double total = 0.0;               // R_t, sum of per-agent rewards
  double global = 0.0;              // coverage term shared by all agents
  std::vector<double> per_agent;    // r_t^i = (global + local_i) / 2
  std::vector<int> collisions;      // C_t^i
};

// Coverage-plus-collision reward. `radii` holds one collision radius per
// agent; two agents collide when their distance is below the sum of radii.
RewardBreakdown spread_reward(std::span<const Vec2> positions,
                              std::span<const Vec2> landmarks,
                              std::span<const double> radii);

struct StepOutcome {
  std::vector<double> joint_obs;  // n_agents rows of obs_width, flattened
  RewardBreakdown reward;
  bool done = false;
};

// Cooperative navigation: N agents, K = N landmarks, 2-D force actions in
// [-1, 1]^2 under double-integrator dynamics. With N = 1 this is the solo
// navigation task.
//
// Agent observation layout:
//   [vel(2), pos(2), landmark_k - pos (2K), agent_j - pos (2(N-1))]
// landmarks by index, other agents in ascending index skipping self.
// Global state layout: [positions(2N), velocities(2N), landmarks(2K)].
class SpreadWorld {
 public:
  explicit SpreadWorld(std::size_t n_agents, SpreadParams params = {});

  std::size_t n_agents() const { return n_agents_; }
  std::size_t n_landmarks() const { return n_agents_; }
  std::size_t obs_width() const { return 4 + 2 * n_landmarks() + 2 * (n_agents_ - 1); }
  static constexpr std::size_t act_width() { return 2; }
  std::size_t state_width() const { return 4 * n_agents_ + 2 * n_landmarks(); }
  const SpreadParams& params() const { return params_; }

  // Random placement from `seed`; returns the joint observation.
  std::vector<double> reset(std::uint64_t seed);
  // Places entities explicitly (velocities zero, t = 0).
  std::vector<double> reset_to(std::vector<Vec2> positions,
                               std::vector<Vec2> landmarks);
  // Joint action is n_agents rows of 2. Out-of-range components are clamped
  // to [-1, 1] and reported once per world through the warning log.
  StepOutcome step(std::span<const double> joint_action);

  const SpreadState& state() const { return state_; }
  void set_state(SpreadState state);
  bool done() const { return state_.t >= params_.horizon; }

  std::vector<double> observe(std::size_t agent) const;
  std::vector<double> joint_observation() const;
  std::vector<double> global_state() const;
  RewardBreakdown current_reward() const;

 private:
  std::size_t n_agents_;
  SpreadParams params_;
  SpreadState state_;
  bool warned_clamp_ = false;
};

// The solo navigation task: one agent, one landmark, observation width 6.
SpreadWorld make_solo_nav(SpreadParams params = {});

}  // namespace soco::envs
