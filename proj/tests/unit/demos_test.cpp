#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "soco/demos/behavior_cloning.hpp"
#include "soco/demos/demo_dataset.hpp"
#include "soco/demos/solo_policy.hpp"
#include "soco/envs/spread.hpp"
#include "soco/error.hpp"

using namespace soco;
using demos::DemoDataset;
using numerics::Tensor;

namespace {

DemoDataset tiny_dataset() {
  DemoDataset d;
  d.obs_width = 6;
  d.act_width = 2;
  d.observations = {0.1f, 0.2f, 0.3f, 0.4f, 0.5f, 0.6f, -1.f, -2.f, -3.f, -4.f, -5.f, -6.f};
  d.actions = {1.f, 0.f, -1.f, 0.f};
  d.metadata = {{"env", "solo_nav"}, {"count", 2}};
  return d;
}

}  // namespace

TEST_CASE("demo file round trip is exact") {
  const auto d = tiny_dataset();
  const auto bytes = demos::encode_demos(d);
  CHECK(std::string(bytes.begin(), bytes.begin() + 8) == "SOCODEMO");
  // header 8 + 4 + 8 + 4 + 4, then 12 + 4 floats
  CHECK(bytes[8] == 1);
  CHECK(bytes[12] == 2);
  const auto back = demos::decode_demos(bytes);
  CHECK(back.observations == d.observations);
  CHECK(back.actions == d.actions);
  CHECK(back.metadata == d.metadata);
  CHECK(back.size() == 2);
}

TEST_CASE("demo decoding rejects corruption") {
  auto bytes = demos::encode_demos(tiny_dataset());
  auto truncated = bytes;
  truncated.resize(bytes.size() - 3);
  CHECK_THROWS_AS(demos::decode_demos(truncated), FormatError);
  auto trailing = bytes;
  trailing.push_back(0);
  CHECK_THROWS_AS(demos::decode_demos(trailing), FormatError);
  auto magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_AS(demos::decode_demos(magic), FormatError);
}

TEST_CASE("dataset validation") {
  auto d = tiny_dataset();
  d.actions[0] = 1.5f;
  CHECK_THROWS(d.validate());
  d = tiny_dataset();
  d.actions.pop_back();
  CHECK_THROWS(d.validate());
}

TEST_CASE("demo stats") {
  const auto s = demos::demo_stats(tiny_dataset());
  CHECK(s.count == 2);
  REQUIRE(s.action_mean);
  CHECK((*s.action_mean)[0] == 0.0);
  CHECK((*s.action_mean)[1] == 0.0);
  CHECK((*s.action_std)[0] == doctest::Approx(1.0));

  auto c = tiny_dataset();
  c.actions = {0.3f, 0.3f, 0.3f, 0.3f};
  CHECK((*demos::demo_stats(c).action_std)[1] == 0.0);

  DemoDataset empty;
  empty.obs_width = 6;
  empty.act_width = 2;
  const auto e = demos::demo_stats(empty);
  CHECK(e.count == 0);
  CHECK_FALSE(e.action_mean.has_value());
}

TEST_CASE("collecting zero pairs gives an empty, valid file") {
  Rng rng(1);
  const numerics::Mlp expert({6, 8, 2}, numerics::OutputHead::kTanh, rng);
  auto env = envs::make_solo_nav();
  const auto report = demos::collect_demos(expert, env, 0, 3);
  CHECK(report.dataset.size() == 0);
  const auto path = std::filesystem::temp_directory_path() / "soco_empty_demos.bin";
  demos::save_demos(path, report.dataset);
  const auto back = demos::load_demos(path);
  CHECK(back.size() == 0);
  CHECK(back.metadata.at("count") == 0);
  std::filesystem::remove(path);
}

TEST_CASE("collection is deterministic and records metadata") {
  Rng rng(2);
  const numerics::Mlp expert({6, 16, 2}, numerics::OutputHead::kTanh, rng);
  auto env1 = envs::make_solo_nav(), env2 = envs::make_solo_nav();
  const auto a = demos::collect_demos(expert, env1, 60, 5);
  const auto b = demos::collect_demos(expert, env2, 60, 5);
  CHECK(a.dataset.observations == b.dataset.observations);
  CHECK(a.dataset.size() == 60);
  CHECK(a.complete_episodes == 2);
  CHECK(a.dataset.metadata.at("env") == "solo_nav");
  CHECK(a.dataset.metadata.at("count") == 60);
  envs::SpreadWorld spread(3);
  CHECK_THROWS(demos::collect_demos(expert, spread, 10, 1));
}

TEST_CASE("bc loss oracles") {
  const demos::SoloPolicy zero(numerics::Mlp::zeros({6, 4, 2}, numerics::OutputHead::kTanh));
  const auto obs = Tensor::from_rows({{1, 2, 3, 4, 5, 6}});
  CHECK(demos::bc_loss(zero, obs, Tensor::from_rows({{1, 0}})) == 1.0);

  // Targets produced by the policy itself: zero loss, zero gradient.
  Rng rng(4);
  demos::SoloPolicy self(6, 2, 16, rng);
  Tensor x = Tensor::matrix(8, 6);
  for (double& v : x.data()) v = uniform(rng, -1, 1);
  const auto y = self.act(x);
  const auto before = self.net().params();
  numerics::AdamState adam(self.net().params(), {});
  CHECK(demos::bc_update(self, adam, x, y) == 0.0);
  CHECK(self.net().params() == before);
}

TEST_CASE("bc fits a linear expert") {
  Rng rng(6);
  DemoDataset d;
  d.obs_width = 6;
  d.act_width = 2;
  for (int i = 0; i < 1000; ++i) {
    float o[6];
    for (float& v : o) v = static_cast<float>(uniform(rng, -1, 1));
    d.observations.insert(d.observations.end(), o, o + 6);
    d.actions.push_back(0.3f * o[4] - 0.2f * o[0]);
    d.actions.push_back(0.25f * o[5] + 0.1f * o[2]);
  }
  Rng init(7);
  demos::SoloPolicy solo(6, 2, 128, init);
  const auto report = demos::train_bc(solo, d, {}, 8);
  CHECK(report.loss_curve.size() == 5000);
  CHECK(report.final_loss < report.initial_loss);
  CHECK(report.final_loss < 1e-2);
}

TEST_CASE("frozen solo policy refuses updates") {
  Rng rng(1);
  demos::SoloPolicy solo(6, 2, 8, rng);
  const auto h = solo.hash();
  solo.freeze();
  numerics::AdamState adam(solo.net().params(), {});
  CHECK_THROWS_AS(demos::bc_update(solo, adam, Tensor::matrix(1, 6), Tensor::matrix(1, 2)),
                  FrozenPolicyError);
  CHECK(solo.hash() == h);
  CHECK_THROWS_AS(demos::SoloPolicy(numerics::Mlp::zeros({6, 4, 2}, numerics::OutputHead::kIdentity)),
                  ConfigError);
}
