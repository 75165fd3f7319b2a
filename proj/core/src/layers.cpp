#include "pnsr/layers.hpp"

#include <Eigen/Core>
#include <cmath>
#include <string>

#include "pnsr/error.hpp"
#include "pnsr/metrics.hpp"

namespace pnsr {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using MutMap = Eigen::Map<RowMatrix>;

void require_rank(const Tensor& t, std::size_t rank, const char* what) {
  if (t.rank() != rank) {
    throw ArgumentError(std::string(what) + ": expected rank " + std::to_string(rank) +
                        " tensor, got " + t.shape_string());
  }
}

void check_conv_shapes(const Tensor& x, const Tensor& weight) {
  require_rank(x, 3, "conv2d input");
  require_rank(weight, 4, "conv2d weight");
  if (weight.dim(1) != x.dim(0)) {
    throw ArgumentError("conv2d: weight " + weight.shape_string() + " does not accept input " +
                        x.shape_string());
  }
  if (weight.dim(2) != weight.dim(3) || weight.dim(2) % 2 == 0) {
    throw ArgumentError("conv2d: kernel must be square with odd size, got " + weight.shape_string());
  }
}

// Column matrix (C k k, H W) of zero-padded input patches.
RowMatrix im2col(const Tensor& x, int k) {
  const int c_in = x.dim(0);
  const int h = x.dim(1);
  const int w = x.dim(2);
  const int pad = k / 2;
  RowMatrix cols = RowMatrix::Zero(static_cast<Eigen::Index>(c_in) * k * k,
                                   static_cast<Eigen::Index>(h) * w);
  for (int c = 0; c < c_in; ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        double* row = cols.row((c * k + ky) * k + kx).data();
        for (int y = 0; y < h; ++y) {
          const int sy = y + ky - pad;
          if (sy < 0 || sy >= h) continue;
          for (int xo = 0; xo < w; ++xo) {
            const int sx = xo + kx - pad;
            if (sx < 0 || sx >= w) continue;
            row[y * w + xo] = x.at(c, sy, sx);
          }
        }
      }
    }
  }
  return cols;
}

Tensor col2im(const RowMatrix& cols, int c_in, int h, int w, int k) {
  const int pad = k / 2;
  Tensor x({c_in, h, w});
  for (int c = 0; c < c_in; ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const double* row = cols.row((c * k + ky) * k + kx).data();
        for (int y = 0; y < h; ++y) {
          const int sy = y + ky - pad;
          if (sy < 0 || sy >= h) continue;
          for (int xo = 0; xo < w; ++xo) {
            const int sx = xo + kx - pad;
            if (sx < 0 || sx >= w) continue;
            x.at(c, sy, sx) += row[y * w + xo];
          }
        }
      }
    }
  }
  return x;
}

}  // namespace

Tensor conv2d_forward(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  check_conv_shapes(x, weight);
  require_rank(bias, 1, "conv2d bias");
  const int c_out = weight.dim(0);
  if (bias.dim(0) != c_out) throw ArgumentError("conv2d: bias length does not match out channels");
  const int k = weight.dim(2);
  const int h = x.dim(1);
  const int w = x.dim(2);
  const Eigen::Index hw = static_cast<Eigen::Index>(h) * w;

  const RowMatrix cols = im2col(x, k);
  const ConstMap wmat(weight.data().data(), c_out, cols.rows());
  Tensor out({c_out, h, w});
  MutMap omat(out.data().data(), c_out, hw);
  omat.noalias() = wmat * cols;
  for (int o = 0; o < c_out; ++o) omat.row(o).array() += bias[static_cast<std::size_t>(o)];
  return out;
}

Conv2dGrads conv2d_backward(const Tensor& x, const Tensor& weight, const Tensor& grad_out) {
  check_conv_shapes(x, weight);
  require_rank(grad_out, 3, "conv2d grad_out");
  const int c_out = weight.dim(0);
  const int c_in = x.dim(0);
  const int k = weight.dim(2);
  const int h = x.dim(1);
  const int w = x.dim(2);
  if (grad_out.dim(0) != c_out || grad_out.dim(1) != h || grad_out.dim(2) != w) {
    throw ArgumentError("conv2d_backward: grad_out " + grad_out.shape_string() +
                        " inconsistent with forward output");
  }
  const Eigen::Index hw = static_cast<Eigen::Index>(h) * w;

  const RowMatrix cols = im2col(x, k);
  const ConstMap wmat(weight.data().data(), c_out, cols.rows());
  const ConstMap gmat(grad_out.data().data(), c_out, hw);

  Conv2dGrads grads{Tensor(), Tensor(weight.shape()), Tensor({c_out})};
  MutMap gw(grads.weight.data().data(), c_out, cols.rows());
  gw.noalias() = gmat * cols.transpose();
  for (int o = 0; o < c_out; ++o) {
    const double* g = grad_out.data().data() + static_cast<std::size_t>(o) * static_cast<std::size_t>(hw);
    grads.bias[static_cast<std::size_t>(o)] = pairwise_sum({g, static_cast<std::size_t>(hw)});
  }
  const RowMatrix gcols = wmat.transpose() * gmat;
  grads.x = col2im(gcols, c_in, h, w, k);
  return grads;
}

Tensor relu_forward(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.data()) v = v > 0.0 ? v : 0.0;
  return y;
}

Tensor relu_backward(const Tensor& y, const Tensor& grad_out) {
  if (y.shape() != grad_out.shape()) throw ArgumentError("relu_backward: shape mismatch");
  Tensor g = grad_out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(y[i] > 0.0)) g[i] = 0.0;
  }
  return g;
}

Tensor pixel_shuffle(const Tensor& x, int r) {
  require_rank(x, 3, "pixel_shuffle");
  if (r < 1) throw ArgumentError("pixel_shuffle: factor must be positive");
  const int rr = r * r;
  if (x.dim(0) % rr != 0) {
    throw ArgumentError("pixel_shuffle: " + std::to_string(x.dim(0)) +
                        " channels not divisible by " + std::to_string(rr));
  }
  const int c_out = x.dim(0) / rr;
  const int h = x.dim(1);
  const int w = x.dim(2);
  Tensor out({c_out, h * r, w * r});
  for (int c = 0; c < c_out; ++c)
    for (int dy = 0; dy < r; ++dy)
      for (int dx = 0; dx < r; ++dx)
        for (int y = 0; y < h; ++y)
          for (int xo = 0; xo < w; ++xo)
            out.at(c, y * r + dy, xo * r + dx) = x.at(c * rr + dy * r + dx, y, xo);
  return out;
}

Tensor pixel_unshuffle(const Tensor& x, int r) {
  require_rank(x, 3, "pixel_unshuffle");
  if (r < 1) throw ArgumentError("pixel_unshuffle: factor must be positive");
  if (x.dim(1) % r != 0 || x.dim(2) % r != 0) {
    throw ArgumentError("pixel_unshuffle: spatial size " + x.shape_string() +
                        " not divisible by " + std::to_string(r));
  }
  const int rr = r * r;
  const int c_in = x.dim(0);
  const int h = x.dim(1) / r;
  const int w = x.dim(2) / r;
  Tensor out({c_in * rr, h, w});
  for (int c = 0; c < c_in; ++c)
    for (int dy = 0; dy < r; ++dy)
      for (int dx = 0; dx < r; ++dx)
        for (int y = 0; y < h; ++y)
          for (int xo = 0; xo < w; ++xo)
            out.at(c * rr + dy * r + dx, y, xo) = x.at(c, y * r + dy, xo * r + dx);
  return out;
}

LossResult charbonnier_loss(const Tensor& pred, const Tensor& target,
                            std::span<const std::uint8_t> valid, double eps) {
  require_rank(pred, 3, "charbonnier pred");
  if (pred.shape() != target.shape()) {
    throw ArgumentError("charbonnier: pred " + pred.shape_string() + " vs target " +
                        target.shape_string());
  }
  const std::size_t plane = static_cast<std::size_t>(pred.dim(1)) * static_cast<std::size_t>(pred.dim(2));
  if (valid.size() != plane) throw ArgumentError("charbonnier: mask size does not match");
  if (!(eps > 0.0)) throw ArgumentError("charbonnier: eps must be positive");

  std::size_t n_valid = 0;
  for (auto m : valid) n_valid += m ? 1 : 0;
  if (n_valid == 0) throw EmptyInputError("charbonnier: no valid pixels");

  const auto channels = static_cast<std::size_t>(pred.dim(0));
  const double count = static_cast<double>(n_valid * channels);
  LossResult out{0.0, Tensor(pred.shape())};
  std::vector<double> terms;
  terms.reserve(n_valid * channels);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t i = 0; i < plane; ++i) {
      if (!valid[i]) continue;
      const std::size_t j = c * plane + i;
      const double d = pred[j] - target[j];
      const double r = std::sqrt(d * d + eps * eps);
      terms.push_back(r);
      out.grad[j] = d / r / count;
    }
  }
  out.value = pairwise_sum(terms) / count;
  return out;
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double lr, const AdamHyper& hyper) {
  if (params.size() != grads.size()) throw ArgumentError("adam: params/grads size mismatch");
  if (state.m.empty() && state.v.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw ArgumentError("adam: optimizer state size mismatch");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(hyper.beta1, t);
  const double c2 = 1.0 - std::pow(hyper.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = hyper.beta1 * state.m[i] + (1.0 - hyper.beta1) * g;
    state.v[i] = hyper.beta2 * state.v[i] + (1.0 - hyper.beta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + hyper.eps);
  }
}

}  // namespace pnsr
