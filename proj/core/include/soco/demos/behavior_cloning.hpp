#pragma once

#include <cstdint>
#include <vector>

#include "soco/demos/demo_dataset.hpp"
#include "soco/demos/solo_policy.hpp"
#include "soco/numerics/adam.hpp"

namespace soco::demos {

// Mean over the batch of ||policy(o) - a||_2^2.
double bc_loss(const SoloPolicy& policy, const numerics::Tensor& obs,
               const numerics::Tensor& actions);

// One MSE behavior-cloning step: computes the loss, backpropagates and
// applies Adam. Returns the pre-update loss.
double bc_update(SoloPolicy& policy, numerics::AdamState& adam,
                 const numerics::Tensor& obs, const numerics::Tensor& actions);

struct BcConfig {
  std::size_t steps = 5000;
  std::size_t batch_size = 256;
  double learning_rate = 1e-3;
};

struct BcReport {
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::vector<double> loss_curve;  // per step
};

// Minibatch BC over the dataset with uniformly sampled (with replacement)
// rows. The policy is left unfrozen; callers freeze it once satisfied.
BcReport train_bc(SoloPolicy& policy, const DemoDataset& data, const BcConfig& config,
                  std::uint64_t seed);

}  // namespace soco::demos
