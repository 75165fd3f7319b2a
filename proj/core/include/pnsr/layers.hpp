#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pnsr/tensor.hpp"

namespace pnsr {

/// Same-size 2-D cross-correlation with zero padding of k / 2.
/// x: (C, H, W), weight: (O, C, k, k) with odd k, bias: (O). Returns (O, H, W).
Tensor conv2d_forward(const Tensor& x, const Tensor& weight, const Tensor& bias);

struct Conv2dGrads {
  Tensor x;
  Tensor weight;
  Tensor bias;
};

/// Exact gradients of conv2d_forward given dL/d(output).
Conv2dGrads conv2d_backward(const Tensor& x, const Tensor& weight, const Tensor& grad_out);

Tensor relu_forward(const Tensor& x);
/// Gradient through ReLU; `y` is the forward output.
Tensor relu_backward(const Tensor& y, const Tensor& grad_out);

/// (C r^2, H, W) -> (C, rH, rW): element (c r^2 + dy r + dx, y, x) moves to
/// (c, y r + dy, x r + dx).
Tensor pixel_shuffle(const Tensor& x, int r);
/// Inverse of pixel_shuffle; also its adjoint, hence its backward pass.
Tensor pixel_unshuffle(const Tensor& x, int r);

struct LossResult {
  double value = 0.0;
  Tensor grad;
};

/// Mean of sqrt((pred - target)^2 + eps^2) over valid pixels and all channels.
/// `valid` is an H x W mask shared by every channel; masked pixels get zero
/// gradient. Throws EmptyInputError when no pixel is valid.
LossResult charbonnier_loss(const Tensor& pred, const Tensor& target,
                            std::span<const std::uint8_t> valid, double eps);

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long long step = 0;

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

/// One bias-corrected Adam update, in place. The state is sized on first use.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double lr, const AdamHyper& hyper = {});

}  // namespace pnsr
