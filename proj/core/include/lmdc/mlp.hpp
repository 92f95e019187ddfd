#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lmdc/rng.hpp"

namespace lmdc {

enum class Activation { relu, tanh_bounded, identity };

struct DenseLayer {
  int in = 0;
  int out = 0;
  std::vector<double> w;  // out x in, row-major
  std::vector<double> b;  // out
};

// Fully connected network. Hidden layers share one activation; the output
// layer has its own (tanh for policies that emit actions in [-1,1]^m,
// identity for value heads). All math runs in 64-bit.
struct Mlp {
  std::vector<int> dims;  // e.g. {15, 128, 128, 3}
  Activation hidden_activation = Activation::relu;
  Activation output_activation = Activation::identity;
  std::vector<DenseLayer> layers;

  int input_dim() const { return dims.empty() ? 0 : dims.front(); }
  int output_dim() const { return dims.empty() ? 0 : dims.back(); }
  std::size_t parameter_count() const;

  // Parameter vector layout: layer 0 weights (row-major), layer 0 biases,
  // layer 1 weights, ... Checkpoints use the same order.
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> params);
};

// Weights and biases drawn uniformly from +-1/sqrt(fan_in), per layer.
Mlp make_mlp(const std::vector<int>& dims, Activation output_activation, Rng& rng);

struct LayerGrad {
  std::vector<double> dw;
  std::vector<double> db;
};

struct GradientBundle {
  std::vector<LayerGrad> layers;
  std::vector<double> input_grad;

  void resize_like(const Mlp& net);
  void zero();
  std::vector<double> flatten() const;  // same layout as Mlp::flatten
};

// Scratch buffers reused across forward/backward calls to keep the training
// loop allocation-free.
struct MlpWorkspace {
  std::vector<std::vector<double>> pre;   // pre-activation per layer
  std::vector<std::vector<double>> act;   // post-activation per layer
  std::vector<std::vector<double>> delta;
  void resize_like(const Mlp& net);
};

std::vector<double> forward(const Mlp& net, std::span<const double> input);

// Forward pass into a workspace; returns the output activation view.
std::span<const double> forward_ws(const Mlp& net, std::span<const double> input,
                                   MlpWorkspace& ws);

// Reverse-mode pass for the scalar L = dot(upstream, forward(net, input)).
// Parameter gradients are summed into *acc when acc is non-null; dL/dinput
// is written to input_grad when it is non-empty (it must then have input
// size). Either output can be skipped independently.
void backward_into(const Mlp& net, std::span<const double> input,
                   std::span<const double> upstream, GradientBundle* acc,
                   std::span<double> input_grad, MlpWorkspace& ws);

// Convenience wrapper: fresh bundle with both parameter and input gradients.
GradientBundle backward(const Mlp& net, std::span<const double> input,
                        std::span<const double> upstream);

enum class OptimizerMethod { sgd, adam };
enum class UpdateDirection { descent, ascent };

struct OptimizerState {
  OptimizerMethod method = OptimizerMethod::adam;
  double step_size = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step_count = 0;
  std::vector<LayerGrad> m;  // first moments, adam only
  std::vector<LayerGrad> v;  // second moments, adam only
};

OptimizerState make_optimizer(const Mlp& net, OptimizerMethod method, double step_size);

// One optimizer step along (descent) or against (ascent) the gradient.
void apply_update(Mlp& net, const GradientBundle& grads, OptimizerState& opt,
                  UpdateDirection direction);

// Max over parameters of |analytic - numeric| / max(1e-8, |numeric|) where
// numeric is the central difference (h = 1e-5) of dot(upstream, output).
double max_relative_fd_error(const Mlp& net, std::span<const double> input,
                             std::span<const double> upstream,
                             const GradientBundle& analytic);

// Same measure against the net's own backward pass.
double finite_difference_check(const Mlp& net, std::span<const double> input,
                               std::span<const double> upstream);

}  // namespace lmdc
