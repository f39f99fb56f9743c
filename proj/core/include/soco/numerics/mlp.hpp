#pragma once

#include <array>
#include <cstddef>

#include "soco/numerics/rng.hpp"
#include "soco/numerics/tensor.hpp"

namespace soco::numerics {

enum class OutputHead { kIdentity, kTanh };

// Layer widths of a network with exactly two hidden layers: in -> h -> h -> out.
struct MlpShape {
  std::size_t input = 0;
  std::size_t hidden = 0;
  std::size_t output = 0;

  std::size_t parameter_count() const {
    return input * hidden + hidden + hidden * hidden + hidden +
           hidden * output + output;
  }
  friend bool operator==(const MlpShape&, const MlpShape&) = default;
};

// Activations recorded by a training-mode forward pass.
struct MlpTape {
  Tensor input;
  Tensor hidden1;  // post-ReLU
  Tensor hidden2;  // post-ReLU
  Tensor output;   // post-head
  bool recorded = false;
};

// ReLU network with two hidden layers and a configurable output head.
//
// Parameters are held as {W1, b1, W2, b2, W3, b3}; weight matrices are stored
// [fan_in, fan_out] so a batch forward is `X * W + b`. Initialization draws
// weights uniformly from [-1/sqrt(fan_in), 1/sqrt(fan_in)] and zeroes biases.
class Mlp {
 public:
  Mlp() = default;
  Mlp(MlpShape shape, OutputHead head, Rng& rng);

  // All weights and biases zero.
  static Mlp zeros(MlpShape shape, OutputHead head);

  const MlpShape& shape() const { return shape_; }
  OutputHead head() const { return head_; }
  std::size_t input_width() const { return shape_.input; }
  std::size_t output_width() const { return shape_.output; }

  // Inference forward pass over a [batch, input] tensor.
  Tensor forward(const Tensor& input) const;
  // Training forward pass; records what `backward` needs into `tape`.
  Tensor forward(const Tensor& input, MlpTape& tape) const;

  // Reverse-mode pass for upstream gradient dL/d(output). Parameter gradients
  // are accumulated into `param_grads` (which must match `params()` shapes)
  // and the input gradient is written to `input_grad`; either may be null.
  void backward(const MlpTape& tape, const Tensor& upstream,
                ParamSet* param_grads, Tensor* input_grad) const;

  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

 private:
  void check_input(const Tensor& input) const;

  MlpShape shape_;
  OutputHead head_ = OutputHead::kIdentity;
  ParamSet params_;
};

}  // namespace soco::numerics
