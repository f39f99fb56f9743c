#include <doctest.h>

#include <cmath>
#include <memory>

#include "soco/decomp/layout.hpp"
#include "soco/envs/spread.hpp"
#include "soco/error.hpp"
#include "soco/fusion/clip.hpp"
#include "soco/fusion/editor.hpp"
#include "soco/fusion/fused_policy.hpp"
#include "soco/fusion/gating.hpp"
#include "soco/numerics/finite_diff.hpp"

using namespace soco;
using namespace soco::fusion;
using numerics::Tensor;

namespace {

std::shared_ptr<const demos::SoloPolicy> random_solo(std::uint64_t seed) {
  Rng rng(seed);
  auto solo = std::make_shared<demos::SoloPolicy>(6, 2, 32, rng);
  solo->freeze();
  return solo;
}

std::vector<double> spread_obs(std::size_t n, std::uint64_t seed, std::size_t agent = 0) {
  envs::SpreadWorld env(n);
  env.reset(seed);
  return env.observe(agent);
}

FusionConfig config(double strength, GatingMode gating = GatingMode::kLearned,
                    ClipMode clip = ClipMode::kTanh) {
  return {.strength = strength, .gating = gating, .clip = clip, .hidden = 32};
}

}  // namespace

TEST_CASE("mode names") {
  CHECK(parse_clip_mode("norm") == ClipMode::kNorm);
  CHECK(parse_gating_mode("erg") == GatingMode::kEpisodeRandom);
  CHECK(to_string(GatingMode::kFixed) == "fg");
  CHECK_THROWS_AS(parse_clip_mode("soft"), ConfigError);
  CHECK_THROWS_AS(parse_gating_mode("LEARNED"), ConfigError);
}

TEST_CASE("softmax of (2,1,0)") {
  const std::vector<double> logits = {2.0, 1.0, 0.0};
  const auto w = softmax(logits, 1.0);
  CHECK(std::abs(w[0] - 0.665240955774821890) < 1e-10);
  CHECK(std::abs(w[1] - 0.244728471054797652) < 1e-10);
  CHECK(std::abs(w[2] - 0.0900305731703804580) < 1e-10);
  CHECK(argmax(w) == 0);
}

TEST_CASE("bounded residual") {
  CHECK(bounded_residual(123.0, 0.0) == 0.0);
  CHECK(bounded_residual(0.0, 2.0) == 0.0);
  CHECK(std::abs(bounded_residual(1.9, 1.9) - 1.44702889631595329) < 1e-10);
  CHECK(std::abs(bounded_residual(1e6, 0.7) - 0.7) < 1e-6);
  CHECK(std::abs(bounded_residual(-1e6, 0.7) + 0.7) < 1e-6);
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const double raw = uniform(rng, -50, 50), L = uniform(rng, 0.01, 3.0);
    CHECK(std::abs(bounded_residual(raw, L)) <= L);
  }
}

TEST_CASE("clip variants") {
  const std::vector<double> zero = {0.0, 0.0};
  for (auto mode : {ClipMode::kTanh, ClipMode::kNorm, ClipMode::kHard}) {
    CHECK(fuse(zero, zero, mode, 1.0) == zero);
  }
  const std::vector<double> sel = {1.0, -0.5};
  CHECK(fuse(sel, zero, ClipMode::kNorm, 1.0) == std::vector<double>{0.5, -0.25});
  const std::vector<double> over = {1.7, -0.2};
  CHECK(fuse(over, zero, ClipMode::kHard, 0.0) == std::vector<double>{1.0, -0.2});
  // tanh clip is the identity at L = 0 and tanh otherwise
  CHECK(fuse(over, zero, ClipMode::kTanh, 0.0) == over);
  CHECK(fuse(over, zero, ClipMode::kTanh, 0.5)[0] == std::tanh(1.7));
}

TEST_CASE("clip jacobians") {
  for (double x = -0.9; x <= 0.9 + 1e-12; x += 0.01) {
    CHECK(clip_derivative(x, ClipMode::kTanh, 1.0) >= 0.19);
  }
  CHECK(clip_derivative(1.3, ClipMode::kHard, 1.0) == 0.0);
  CHECK(clip_derivative(-2.0, ClipMode::kHard, 1.0) == 0.0);
  CHECK(clip_derivative(0.3, ClipMode::kHard, 1.0) == 1.0);
  CHECK(clip_derivative(0.3, ClipMode::kNorm, 2.0) == 1.0 / 3.0);
}

TEST_CASE("candidate actions") {
  const auto zero = std::make_shared<demos::SoloPolicy>(
      numerics::Mlp::zeros({6, 4, 2}, numerics::OutputHead::kTanh));
  const auto views = Tensor::from_rows({{1, 2, 3, 4, 5, 6}, {6, 5, 4, 3, 2, 1}});
  const auto zc = candidate_actions(*zero, views);
  for (double v : zc.data()) CHECK(v == 0.0);

  const auto solo = random_solo(2);
  const auto same = Tensor::from_rows({{0.1, 0.2, 0.3, 0.4, 0.5, 0.6}, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6}});
  const auto c = candidate_actions(*solo, same);
  CHECK(c.row(0)[0] == c.row(1)[0]);
  CHECK(c.row(0)[1] == c.row(1)[1]);
  for (double v : c.data()) CHECK(std::abs(v) <= 1.0);
  CHECK_THROWS_AS(candidate_actions(*solo, Tensor::matrix(2, 5)), ShapeError);
}

TEST_CASE("gate selection") {
  Rng rng(3);
  GatingSelector gate(4, 8, 3, GatingMode::kLearned, 1.0, rng);
  // logits (2, 1, 0) via the output bias of an otherwise zero network
  for (auto& p : gate.net().params()) p.fill(0.0);
  gate.net().params()[5] = Tensor::vector(std::vector<double>{2.0, 1.0, 0.0});
  const auto cands = Tensor::from_rows({{0.1, 0.2}, {0.3, 0.4}, {0.5, 0.6}});
  const std::vector<double> obs = {0.0, 0.0, 0.0, 0.0};
  const std::vector<double> no_noise = {0.0, 0.0, 0.0};
  const auto s = gate_select(gate, obs, cands, rng, true, {}, std::span<const double>(no_noise));
  CHECK(s.chosen == 0);
  CHECK(s.action == std::vector<double>{0.1, 0.2});
  CHECK(std::abs(s.soft_weights[1] - 0.244728471054797652) < 1e-10);

  const std::vector<double> flip = {0.0, 0.0, 5.0};
  CHECK(gate_select(gate, obs, cands, rng, true, {}, std::span<const double>(flip)).chosen == 2);
  CHECK(gate_select(gate, obs, cands, rng, false).chosen == 0);

  GatingSelector single(4, 8, 1, GatingMode::kLearned, 1.0, rng);
  const auto one = Tensor::from_rows({{0.7, -0.3}});
  const auto s1 = gate_select(single, obs, one, rng, true);
  CHECK(s1.action == std::vector<double>{0.7, -0.3});
  CHECK(s1.soft_weights == std::vector<double>{1.0});

  CHECK_THROWS_AS(gate_select(gate, obs, one, rng, true), ShapeError);
}

TEST_CASE("rule-based gating") {
  Rng rng(4);
  const auto cands = Tensor::from_rows({{0.1, 0.2}, {0.3, 0.4}, {0.5, 0.6}});
  const std::vector<double> obs(4, 0.0);
  GatingSelector fg(4, 8, 3, GatingMode::kFixed, 1.0, rng);
  for (std::size_t i = 0; i < 3; ++i) CHECK(gate_select(fg, obs, cands, rng, true, {i}).chosen == i);

  GatingSelector erg(4, 8, 3, GatingMode::kEpisodeRandom, 1.0, rng);
  for (int i = 0; i < 10; ++i) CHECK(gate_select(erg, obs, cands, rng, true, {0, 2}).chosen == 2);

  GatingSelector rg(4, 8, 3, GatingMode::kRandom, 1.0, rng);
  std::size_t hits[3] = {};
  for (int i = 0; i < 300; ++i) ++hits[gate_select(rg, obs, cands, rng, true).chosen];
  for (auto h : hits) CHECK(h > 50);
}

TEST_CASE("editor output") {
  Rng rng(5);
  const std::vector<double> obs = {0.3, -0.2, 0.9, 1.5};
  const ActionEditor off(4, 16, 2, 0.0, rng);
  CHECK(edit_action(off, obs) == std::vector<double>{0.0, 0.0});
  const ActionEditor on(4, 16, 2, 0.25, rng);
  for (double d : edit_action(on, obs)) {
    CHECK(std::abs(d) < 0.25);
    CHECK(d != 0.0);
  }
}

TEST_CASE("fused action composition") {
  const auto solo = random_solo(6);
  Rng rng(7);
  SUBCASE("L=0, G=1 is the solo policy") {
    FusedPolicy p(solo, decomp::spread_layout(1), config(0.0), 0, rng);
    const auto obs = spread_obs(1, 3);
    const auto a = fused_act(p, obs, rng, true);
    const auto expected = solo->act(Tensor({1, 6}, obs));
    CHECK(a.action == std::vector<double>(expected.data().begin(), expected.data().end()));
  }
  SUBCASE("L=0 on spread picks a candidate row") {
    FusedPolicy p(solo, decomp::spread_layout(3), config(0.0), 1, rng);
    for (std::uint64_t s = 0; s < 10; ++s) {
      const auto obs = spread_obs(3, s, 1);
      const auto a = fused_act(p, obs, rng, true);
      const auto views = decomp::build_solo_views(obs, p.layout());
      const auto c = candidate_actions(*solo, Tensor({3, 6}, views));
      CHECK(a.action == std::vector<double>(c.row(a.chosen).begin(), c.row(a.chosen).end()));
      CHECK(a.edit_norm == 0.0);
    }
  }
  SUBCASE("tanh clip with L>0 stays strictly inside (-1, 1)") {
    FusedPolicy p(solo, decomp::spread_layout(3), config(2.0), 0, rng);
    for (auto& t : p.editor().net().params()) {
      for (double& v : t.data()) v *= 20.0;
    }
    for (std::uint64_t s = 0; s < 10; ++s) {
      for (double v : fused_act(p, spread_obs(3, s), rng, true).action) CHECK(std::abs(v) < 1.0);
    }
  }
  SUBCASE("FG assigns distinct candidates across agents") {
    std::vector<std::size_t> picks;
    for (std::size_t i = 0; i < 3; ++i) {
      FusedPolicy p(solo, decomp::spread_layout(3), config(0.0, GatingMode::kFixed), i, rng);
      picks.push_back(fused_act(p, spread_obs(3, 1, i), rng, true).chosen);
    }
    CHECK(picks == std::vector<std::size_t>{0, 1, 2});
  }
  SUBCASE("ERG keeps its pick for the whole episode") {
    FusedPolicy p(solo, decomp::spread_layout(3), config(0.0, GatingMode::kEpisodeRandom), 0, rng);
    p.begin_episode(rng);
    const auto first = fused_act(p, spread_obs(3, 0), rng, true).chosen;
    for (std::uint64_t s = 1; s < 10; ++s) CHECK(fused_act(p, spread_obs(3, s), rng, true).chosen == first);
  }
}

TEST_CASE("batched forward matches single-observation acting in eval mode") {
  const auto solo = random_solo(8);
  Rng rng(9);
  FusedPolicy p(solo, decomp::spread_layout(3), config(0.5), 0, rng);
  Tensor obs = Tensor::matrix(5, 14);
  for (std::size_t r = 0; r < 5; ++r) {
    const auto o = spread_obs(3, 40 + r);
    std::copy(o.begin(), o.end(), obs.row(r).begin());
  }
  FusionTape tape;
  const auto batched = p.forward_batch(obs, p.candidates_batch(obs), rng, false, tape);
  for (std::size_t r = 0; r < 5; ++r) {
    const auto single = fused_act(p, obs.row(r), rng, false);
    for (std::size_t j = 0; j < 2; ++j) CHECK(std::abs(batched(r, j) - single.action[j]) < 1e-12);
    CHECK(tape.chosen[r] == single.chosen);
  }
}

TEST_CASE("straight-through gate gradient matches the soft path") {
  const auto solo = random_solo(10);
  for (bool train : {false, true}) {
    Rng rng(11);
    FusedPolicy p(solo, decomp::spread_layout(3), config(0.0), 0, rng);
    Tensor obs = Tensor::matrix(4, 14);
    for (std::size_t r = 0; r < 4; ++r) {
      const auto o = spread_obs(3, 70 + r);
      std::copy(o.begin(), o.end(), obs.row(r).begin());
    }
    const auto cands = p.candidates_batch(obs);
    Tensor up = Tensor::matrix(4, 2);
    for (double& v : up.data()) v = uniform(rng, -1, 1);

    const std::uint64_t noise_seed = 99;
    Rng fwd_rng(noise_seed);
    FusionTape tape;
    p.forward_batch(obs, cands, fwd_rng, train, tape);
    auto grads = numerics::zeros_like(p.gate().net().params());
    p.backward_batch(tape, up, &grads, nullptr);

    // Soft surrogate sum_r <up_r, sum_k w_rk c_rk> with the same Gumbel draws.
    auto surrogate = [&](std::span<const double> flat) {
      auto net = p.gate().net();
      std::size_t off = 0;
      for (auto& t : net.params()) {
        for (double& v : t.data()) v = flat[off++];
      }
      const auto logits = net.forward(obs);
      Rng noise(noise_seed);
      double total = 0.0;
      for (std::size_t r = 0; r < 4; ++r) {
        std::vector<double> z(3);
        for (std::size_t k = 0; k < 3; ++k) z[k] = logits(r, k) + (train ? gumbel(noise) : 0.0);
        const auto w = softmax(z, 1.0);
        for (std::size_t k = 0; k < 3; ++k) {
          for (std::size_t j = 0; j < 2; ++j) total += up(r, j) * w[k] * cands(r, 2 * k + j);
        }
      }
      return total;
    };
    const auto fd = numerics::finite_diff_grad(surrogate, numerics::flatten(p.gate().net().params()), 1e-6);
    const auto analytic = numerics::flatten(grads);
    CHECK(numerics::max_relative_error(analytic, fd, 1e-5) < 1e-4);
    double norm = 0.0;
    for (double g : analytic) norm += g * g;
    CHECK(norm > 0.0);
  }
}

TEST_CASE("L=0: editor receives exactly zero gradient") {
  const auto solo = random_solo(12);
  Rng rng(13);
  FusedPolicy p(solo, decomp::spread_layout(3), config(0.0), 0, rng);
  Tensor obs({1, 14}, spread_obs(3, 5));
  FusionTape tape;
  p.forward_batch(obs, p.candidates_batch(obs), rng, true, tape);
  auto gate_grads = numerics::zeros_like(p.gate().net().params());
  auto editor_grads = numerics::zeros_like(p.editor().net().params());
  p.backward_batch(tape, Tensor::from_rows({{0.5, -1.0}}), &gate_grads, &editor_grads);
  for (const auto& g : editor_grads) {
    for (double v : g.data()) CHECK(v == 0.0);
  }
}

TEST_CASE("editor gradient matches finite differences for L>0") {
  const auto solo = random_solo(14);
  for (auto clip : {ClipMode::kTanh, ClipMode::kNorm}) {
    Rng rng(15);
    FusedPolicy p(solo, decomp::spread_layout(3), config(0.8, GatingMode::kLearned, clip), 0, rng);
    Tensor obs = Tensor::matrix(3, 14);
    for (std::size_t r = 0; r < 3; ++r) {
      const auto o = spread_obs(3, 90 + r);
      std::copy(o.begin(), o.end(), obs.row(r).begin());
    }
    const auto cands = p.candidates_batch(obs);
    const auto up = Tensor::from_rows({{0.3, -0.7}, {1.0, 0.2}, {-0.4, 0.9}});
    FusionTape tape;
    Rng r0(1);
    p.forward_batch(obs, cands, r0, false, tape);
    auto grads = numerics::zeros_like(p.editor().net().params());
    p.backward_batch(tape, up, nullptr, &grads);

    auto objective = [&](std::span<const double> flat) {
      FusedPolicy q = p;
      std::size_t off = 0;
      for (auto& t : q.editor().net().params()) {
        for (double& v : t.data()) v = flat[off++];
      }
      FusionTape t2;
      Rng r1(1);
      const auto a = q.forward_batch(obs, cands, r1, false, t2);
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) s += up[i] * a[i];
      return s;
    };
    const auto fd = numerics::finite_diff_grad(objective, numerics::flatten(p.editor().net().params()), 1e-6);
    CHECK(numerics::max_relative_error(numerics::flatten(grads), fd, 1e-7) < 1e-4);
  }
}
