#include <benchmark/benchmark.h>

#include <memory>

#include "soco/demos/solo_policy.hpp"
#include "soco/envs/spread.hpp"
#include "soco/marl/trainer.hpp"
#include "soco/numerics/mlp.hpp"

namespace {

using namespace soco;

void BM_MlpForward(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const numerics::Mlp net({28, 128, 1}, numerics::OutputHead::kIdentity, rng);
  numerics::Tensor x({batch, 28}, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(x));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * batch));
}
BENCHMARK(BM_MlpForward)->Arg(1)->Arg(256)->Arg(1000);

void BM_MlpForwardBackward(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const numerics::Mlp net({28, 128, 1}, numerics::OutputHead::kIdentity, rng);
  numerics::Tensor x({batch, 28}, 0.3), up({batch, 1}, 1.0), dx;
  auto grads = numerics::zeros_like(net.params());
  numerics::MlpTape tape;
  for (auto _ : state) {
    net.forward(x, tape);
    net.backward(tape, up, &grads, &dx);
    benchmark::DoNotOptimize(grads);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * batch));
}
BENCHMARK(BM_MlpForwardBackward)->Arg(256)->Arg(1000);

void BM_SpreadStep(benchmark::State& state) {
  envs::SpreadWorld env(3);
  env.reset(7);
  const std::vector<double> action(6, 0.1);
  for (auto _ : state) {
    if (env.done()) env.reset(7);
    benchmark::DoNotOptimize(env.step(action));
  }
}
BENCHMARK(BM_SpreadStep);

marl::MarlSetup bench_setup(bool soco_policy, std::size_t batch) {
  marl::MarlSetup setup;
  setup.n_agents = 3;
  setup.trainer.batch_size = batch;
  setup.trainer.warmup_steps = 2000;
  setup.trainer.total_steps = 1'000'000;
  if (soco_policy) {
    Rng rng(3);
    auto solo = std::make_shared<demos::SoloPolicy>(6, 2, 128, rng);
    solo->freeze();
    setup.kind = marl::PolicyKind::kSoco;
    setup.solo = solo;
  }
  return setup;
}

// One environment step plus one critic update (actor update every other).
void BM_TrainStep(benchmark::State& state) {
  marl::MarlTrainer trainer(bench_setup(state.range(0) != 0, static_cast<std::size_t>(state.range(1))));
  trainer.warmup();
  for (auto _ : state) trainer.train_step();
}
BENCHMARK(BM_TrainStep)
    ->ArgNames({"soco", "batch"})
    ->Args({0, 256})
    ->Args({1, 256})
    ->Args({0, 128})
    ->Args({1, 128})
    ->Args({0, 1000})
    ->Args({1, 1000})
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
