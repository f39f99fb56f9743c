#include "soco/numerics/mlp.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "soco/error.hpp"

namespace soco::numerics {
namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using ConstRowVectorMap = Eigen::Map<const Eigen::RowVectorXd>;
using RowVectorMap = Eigen::Map<Eigen::RowVectorXd>;

MatrixMap view(Tensor& t, std::size_t rows, std::size_t cols) {
  return MatrixMap(t.raw(), static_cast<Eigen::Index>(rows),
                   static_cast<Eigen::Index>(cols));
}

ConstMatrixMap view(const Tensor& t, std::size_t rows, std::size_t cols) {
  return ConstMatrixMap(t.raw(), static_cast<Eigen::Index>(rows),
                        static_cast<Eigen::Index>(cols));
}

ConstRowVectorMap row_view(const Tensor& t) {
  return ConstRowVectorMap(t.raw(), static_cast<Eigen::Index>(t.size()));
}

// out = in * W + b, optionally followed by ReLU.
void affine(const Tensor& in, const Tensor& w, const Tensor& b, Tensor& out,
            bool relu) {
  const std::size_t batch = in.rows();
  const std::size_t fan_in = w.shape()[0];
  const std::size_t fan_out = w.shape()[1];
  auto y = view(out, batch, fan_out);
  y.noalias() = view(in, batch, fan_in) * view(w, fan_in, fan_out);
  y.rowwise() += row_view(b);
  if (relu) y = y.cwiseMax(0.0);
}

}  // namespace

Mlp::Mlp(MlpShape shape, OutputHead head, Rng& rng)
    : Mlp(zeros(shape, head)) {
  const std::array<std::size_t, 3> fan_ins = {shape.input, shape.hidden,
                                              shape.hidden};
  for (std::size_t layer = 0; layer < 3; ++layer) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_ins[layer]));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& w : params_[2 * layer].data()) w = dist(rng);
  }
}

Mlp Mlp::zeros(MlpShape shape, OutputHead head) {
  if (shape.input == 0 || shape.hidden == 0 || shape.output == 0) {
    throw ShapeError("mlp layer sizes must be positive");
  }
  Mlp net;
  net.shape_ = shape;
  net.head_ = head;
  net.params_ = {
      Tensor::matrix(shape.input, shape.hidden), Tensor({shape.hidden}),
      Tensor::matrix(shape.hidden, shape.hidden), Tensor({shape.hidden}),
      Tensor::matrix(shape.hidden, shape.output), Tensor({shape.output}),
  };
  return net;
}

void Mlp::check_input(const Tensor& input) const {
  if (input.rank() != 2 || input.cols() != shape_.input) {
    throw ShapeError("mlp expects input width " + std::to_string(shape_.input) +
                     ", got " + std::to_string(input.cols()));
  }
  input.require_finite("mlp input");
}

Tensor Mlp::forward(const Tensor& input) const {
  MlpTape tape;
  return forward(input, tape);
}

Tensor Mlp::forward(const Tensor& input, MlpTape& tape) const {
  check_input(input);
  const std::size_t batch = input.rows();
  tape.input = input;
  tape.hidden1 = Tensor::matrix(batch, shape_.hidden);
  tape.hidden2 = Tensor::matrix(batch, shape_.hidden);
  tape.output = Tensor::matrix(batch, shape_.output);
  affine(input, params_[0], params_[1], tape.hidden1, true);
  affine(tape.hidden1, params_[2], params_[3], tape.hidden2, true);
  affine(tape.hidden2, params_[4], params_[5], tape.output, false);
  if (head_ == OutputHead::kTanh) {
    for (double& v : tape.output.data()) v = std::tanh(v);
  }
  tape.output.require_finite("mlp output");
  tape.recorded = true;
  return tape.output;
}

void Mlp::backward(const MlpTape& tape, const Tensor& upstream,
                   ParamSet* param_grads, Tensor* input_grad) const {
  if (!tape.recorded) throw Error("mlp backward without a recorded forward pass");
  const std::size_t batch = tape.input.rows();
  if (upstream.rank() != 2 || upstream.rows() != batch ||
      upstream.cols() != shape_.output) {
    throw ShapeError("mlp backward: upstream gradient shape mismatch");
  }
  if (param_grads) require_same_shapes(*param_grads, params_, "mlp backward");
  const std::size_t in = shape_.input, h = shape_.hidden, out = shape_.output;

  RowMatrix d3 = view(upstream, batch, out);
  if (head_ == OutputHead::kTanh) {
    d3.array() *= 1.0 - view(tape.output, batch, out).array().square();
  }

  RowMatrix d2 = d3 * view(params_[4], h, out).transpose();
  d2.array() *= (view(tape.hidden2, batch, h).array() > 0.0).cast<double>();

  RowMatrix d1 = d2 * view(params_[2], h, h).transpose();
  d1.array() *= (view(tape.hidden1, batch, h).array() > 0.0).cast<double>();

  if (param_grads) {
    auto& g = *param_grads;
    view(g[4], h, out).noalias() += view(tape.hidden2, batch, h).transpose() * d3;
    RowVectorMap(g[5].raw(), static_cast<Eigen::Index>(out)) += d3.colwise().sum();
    view(g[2], h, h).noalias() += view(tape.hidden1, batch, h).transpose() * d2;
    RowVectorMap(g[3].raw(), static_cast<Eigen::Index>(h)) += d2.colwise().sum();
    view(g[0], in, h).noalias() += view(tape.input, batch, in).transpose() * d1;
    RowVectorMap(g[1].raw(), static_cast<Eigen::Index>(h)) += d1.colwise().sum();
  }
  if (input_grad) {
    *input_grad = Tensor::matrix(batch, in);
    view(*input_grad, batch, in).noalias() = d1 * view(params_[0], in, h).transpose();
  }
}

}  // namespace soco::numerics
