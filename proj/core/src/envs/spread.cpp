#include "soco/envs/spread.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

#include "soco/error.hpp"
#include "soco/numerics/rng.hpp"

namespace soco::envs {

double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

RewardBreakdown spread_reward(std::span<const Vec2> positions,
                              std::span<const Vec2> landmarks,
                              std::span<const double> radii) {
  if (radii.size() != positions.size()) {
    throw ShapeError("spread_reward: one radius per agent required");
  }
  RewardBreakdown r;
  for (const Vec2& l : landmarks) {
    double nearest = std::numeric_limits<double>::infinity();
    for (const Vec2& p : positions) nearest = std::min(nearest, distance(p, l));
    r.global -= nearest;
  }
  const std::size_t n = positions.size();
  r.collisions.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (distance(positions[i], positions[j]) < radii[i] + radii[j]) {
        ++r.collisions[i];
        ++r.collisions[j];
      }
    }
  }
  r.per_agent.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.per_agent[i] = 0.5 * (r.global - static_cast<double>(r.collisions[i]));
    r.total += r.per_agent[i];
  }
  return r;
}

SpreadWorld::SpreadWorld(std::size_t n_agents, SpreadParams params)
    : n_agents_(n_agents), params_(params) {
  if (n_agents == 0) throw ConfigError("spread world needs at least one agent");
  if (!(params.dt > 0.0) || !(params.mass > 0.0) || params.horizon <= 0) {
    throw ConfigError("spread world: dt, mass and horizon must be positive");
  }
  state_.positions.assign(n_agents_, {});
  state_.velocities.assign(n_agents_, {});
  state_.landmarks.assign(n_landmarks(), {});
}

std::vector<double> SpreadWorld::reset(std::uint64_t seed) {
  Rng rng(seed);
  const double e = params_.spawn_extent;
  auto draw = [&] { return Vec2{uniform(rng, -e, e), uniform(rng, -e, e)}; };

  std::vector<Vec2> positions(n_agents_);
  for (auto& p : positions) p = draw();

  std::vector<Vec2> landmarks;
  const double min_gap = 2.0 * params_.landmark_radius;
  int attempts = 0;
  while (landmarks.size() < n_landmarks()) {
    if (++attempts > params_.max_placement_attempts) {
      throw Error("spread reset: could not place landmarks without overlap");
    }
    const Vec2 candidate = draw();
    const bool clear = std::all_of(landmarks.begin(), landmarks.end(),
                                   [&](const Vec2& l) { return distance(l, candidate) > min_gap; });
    if (clear) landmarks.push_back(candidate);
  }
  return reset_to(std::move(positions), std::move(landmarks));
}

std::vector<double> SpreadWorld::reset_to(std::vector<Vec2> positions,
                                          std::vector<Vec2> landmarks) {
  if (positions.size() != n_agents_ || landmarks.size() != n_landmarks()) {
    throw ShapeError("spread reset_to: entity count mismatch");
  }
  state_.positions = std::move(positions);
  state_.landmarks = std::move(landmarks);
  state_.velocities.assign(n_agents_, {});
  state_.t = 0;
  return joint_observation();
}

void SpreadWorld::set_state(SpreadState state) {
  if (state.positions.size() != n_agents_ || state.velocities.size() != n_agents_ ||
      state.landmarks.size() != n_landmarks()) {
    throw ShapeError("spread set_state: entity count mismatch");
  }
  state_ = std::move(state);
}

StepOutcome SpreadWorld::step(std::span<const double> joint_action) {
  if (joint_action.size() != n_agents_ * act_width()) {
    throw ShapeError("spread step: expected " + std::to_string(n_agents_ * act_width()) +
                     " action components, got " + std::to_string(joint_action.size()));
  }
  const double keep = 1.0 - params_.damping;
  const double accel_scale = params_.dt / params_.mass;
  for (std::size_t i = 0; i < n_agents_; ++i) {
    double ax = joint_action[2 * i];
    double ay = joint_action[2 * i + 1];
    if (!std::isfinite(ax) || !std::isfinite(ay)) {
      throw NonFiniteError("spread step: non-finite action");
    }
    if (std::abs(ax) > 1.0 || std::abs(ay) > 1.0) {
      if (!warned_clamp_) {
        std::cerr << "warning: spread step clamped out-of-range action\n";
        warned_clamp_ = true;
      }
      ax = std::clamp(ax, -1.0, 1.0);
      ay = std::clamp(ay, -1.0, 1.0);
    }
    Vec2& v = state_.velocities[i];
    Vec2& p = state_.positions[i];
    v.x = keep * v.x + ax * accel_scale;
    v.y = keep * v.y + ay * accel_scale;
    p.x += v.x * params_.dt;
    p.y += v.y * params_.dt;
  }
  state_.t += 1;
  StepOutcome out;
  out.reward = current_reward();
  out.joint_obs = joint_observation();
  out.done = done();
  return out;
}

RewardBreakdown SpreadWorld::current_reward() const {
  std::vector<double> radii(n_agents_, params_.agent_radius);
  return spread_reward(state_.positions, state_.landmarks, radii);
}

std::vector<double> SpreadWorld::observe(std::size_t agent) const {
  const Vec2 self = state_.positions[agent];
  const Vec2 vel = state_.velocities[agent];
  std::vector<double> obs;
  obs.reserve(obs_width());
  obs.insert(obs.end(), {vel.x, vel.y, self.x, self.y});
  for (const Vec2& l : state_.landmarks) {
    obs.push_back(l.x - self.x);
    obs.push_back(l.y - self.y);
  }
  for (std::size_t j = 0; j < n_agents_; ++j) {
    if (j == agent) continue;
    obs.push_back(state_.positions[j].x - self.x);
    obs.push_back(state_.positions[j].y - self.y);
  }
  return obs;
}

std::vector<double> SpreadWorld::joint_observation() const {
  std::vector<double> joint;
  joint.reserve(n_agents_ * obs_width());
  for (std::size_t i = 0; i < n_agents_; ++i) {
    const auto o = observe(i);
    joint.insert(joint.end(), o.begin(), o.end());
  }
  return joint;
}

std::vector<double> SpreadWorld::global_state() const {
  std::vector<double> s;
  s.reserve(state_width());
  for (const Vec2& p : state_.positions) s.insert(s.end(), {p.x, p.y});
  for (const Vec2& v : state_.velocities) s.insert(s.end(), {v.x, v.y});
  for (const Vec2& l : state_.landmarks) s.insert(s.end(), {l.x, l.y});
  return s;
}

SpreadWorld make_solo_nav(SpreadParams params) { return SpreadWorld(1, params); }

}  // namespace soco::envs
