#include "pnsr/resample.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pnsr/error.hpp"
#include "pnsr/parallel.hpp"
#include "pnsr/pncc.hpp"

namespace pnsr {

Image::Image(int c, int w, int h, double fill) : channels(c), width(w), height(h) {
  if (c < 1 || w < 0 || h < 0) throw ArgumentError("image: invalid dimensions");
  data.assign(static_cast<std::size_t>(c) * plane_size(), fill);
}

int ResampleSpec::output_size(int input_size) const {
  if (num < 1 || den < 1) throw ArgumentError("resample: factor must be positive");
  const long long scaled = static_cast<long long>(input_size) * num;
  // round-half-up of input * num / den in integer arithmetic
  const long long out = (2 * scaled + den) / (2LL * den);
  if (out < 1) {
    throw ArgumentError("resample: output size for input " + std::to_string(input_size) +
                        " would be zero");
  }
  return static_cast<int>(out);
}

double cubic_kernel(double x, double a) {
  const double t = std::abs(x);
  if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
  return 0.0;
}

std::array<double, 4> cubic_taps(double t, double a) {
  return {cubic_kernel(t + 1.0, a), cubic_kernel(t, a), cubic_kernel(1.0 - t, a),
          cubic_kernel(2.0 - t, a)};
}

namespace {

struct Contribution {
  int pivot = 0;
  std::vector<int> index;
  std::vector<double> weight;
};

int clamp_index(long long i, int n) {
  return static_cast<int>(std::clamp<long long>(i, 0, n - 1));
}

std::vector<Contribution> contributions(int in_size, int out_size, double a) {
  const double scale = static_cast<double>(out_size) / in_size;
  std::vector<Contribution> out(static_cast<std::size_t>(out_size));
  for (int dst = 0; dst < out_size; ++dst) {
    const double src = (dst + 0.5) / scale - 0.5;
    Contribution& c = out[static_cast<std::size_t>(dst)];
    c.pivot = clamp_index(std::llround(src), in_size);
    if (scale >= 1.0) {
      const double base = std::floor(src);
      const auto taps = cubic_taps(src - base, a);
      for (int k = 0; k < 4; ++k) {
        c.index.push_back(clamp_index(static_cast<long long>(base) - 1 + k, in_size));
        c.weight.push_back(taps[static_cast<std::size_t>(k)]);
      }
    } else {
      const double support = 2.0 / scale;
      const auto lo = static_cast<long long>(std::ceil(src - support));
      const auto hi = static_cast<long long>(std::floor(src + support));
      double total = 0.0;
      for (long long i = lo; i <= hi; ++i) {
        const double w = cubic_kernel((src - static_cast<double>(i)) * scale, a);
        if (w == 0.0) continue;
        c.index.push_back(clamp_index(i, in_size));
        c.weight.push_back(w);
        total += w;
      }
      for (double& w : c.weight) w /= total;
    }
  }
  return out;
}

// Evaluated relative to the pivot sample so that a constant signal is
// reproduced exactly even when the weights sum to 1 only up to rounding.
double apply(const Contribution& c, const double* line, std::size_t stride) {
  const double pivot = line[static_cast<std::size_t>(c.pivot) * stride];
  double acc = 0.0;
  for (std::size_t k = 0; k < c.index.size(); ++k) {
    acc += c.weight[k] * (line[static_cast<std::size_t>(c.index[k]) * stride] - pivot);
  }
  return pivot + acc;
}

}  // namespace

Image bicubic_resize_to(const Image& img, int out_width, int out_height, double a) {
  if (out_width < 1 || out_height < 1) {
    throw ArgumentError("bicubic_resize: output size must be at least 1x1");
  }
  if (img.width < 1 || img.height < 1) throw ArgumentError("bicubic_resize: empty input");
  for (double x : img.data) {
    if (!std::isfinite(x)) throw ArgumentError("bicubic_resize: non-finite input value");
  }

  const auto horiz = contributions(img.width, out_width, a);
  const auto vert = contributions(img.height, out_height, a);

  // Horizontal pass: (C, H, W) -> (C, H, W').
  Image tmp(img.channels, out_width, img.height);
  parallel_for(static_cast<std::size_t>(img.channels) * static_cast<std::size_t>(img.height),
               [&](std::size_t row) {
                 const double* src = img.data.data() + row * static_cast<std::size_t>(img.width);
                 double* dst = tmp.data.data() + row * static_cast<std::size_t>(out_width);
                 for (int x = 0; x < out_width; ++x) dst[x] = apply(horiz[static_cast<std::size_t>(x)], src, 1);
               });

  // Vertical pass: (C, H, W') -> (C, H', W').
  Image out(img.channels, out_width, out_height);
  parallel_for(static_cast<std::size_t>(img.channels) * static_cast<std::size_t>(out_height),
               [&](std::size_t row) {
                 const int c = static_cast<int>(row / static_cast<std::size_t>(out_height));
                 const int y = static_cast<int>(row % static_cast<std::size_t>(out_height));
                 const double* src = tmp.plane(c).data();
                 double* dst = out.plane(c).data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(out_width);
                 const auto& contrib = vert[static_cast<std::size_t>(y)];
                 for (int x = 0; x < out_width; ++x) {
                   dst[x] = apply(contrib, src + x, static_cast<std::size_t>(out_width));
                 }
               });
  return out;
}

Image bicubic_resize(const Image& img, const ResampleSpec& spec) {
  return bicubic_resize_to(img, spec.output_size(img.width), spec.output_size(img.height), spec.a);
}

std::vector<std::uint8_t> minpool_mask(std::span<const std::uint8_t> valid, int width, int height,
                                       int r) {
  if (r < 1) throw ArgumentError("minpool_mask: factor must be positive");
  if (width < 1 || height < 1 || valid.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw ArgumentError("minpool_mask: mask size does not match dimensions");
  }
  if (width % r != 0 || height % r != 0) {
    throw ArgumentError("minpool_mask: " + std::to_string(width) + "x" + std::to_string(height) +
                        " is not divisible by " + std::to_string(r) + "; crop first");
  }
  const int lw = width / r;
  const int lh = height / r;
  std::vector<std::uint8_t> out(static_cast<std::size_t>(lw) * static_cast<std::size_t>(lh), 1);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (!valid[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)]) {
        out[static_cast<std::size_t>(y / r) * static_cast<std::size_t>(lw) + static_cast<std::size_t>(x / r)] = 0;
      }
    }
  }
  return out;
}

void require_supported_scale(int r) {
  if (r != 4 && r != 8 && r != 16) {
    throw ArgumentError("unsupported scale " + std::to_string(r) +
                        "; supported scales are 4, 8 and 16 (see README)");
  }
}

LrPair make_lr_pair(const DepthMap& hr, const Intrinsics& intr, int r) {
  require_supported_scale(r);
  intr.validate();
  hr.validate();
  require_matching_resolution(hr, intr);
  if (hr.width % r != 0 || hr.height % r != 0) {
    throw ArgumentError("make_lr_pair: " + std::to_string(hr.width) + "x" +
                        std::to_string(hr.height) + " is not divisible by " + std::to_string(r));
  }

  Image filled(1, hr.width, hr.height);
  filled.data = hr.depth;
  fill_invalid(filled.data, 1, hr.valid, hr.width, hr.height);

  const Image small = bicubic_resize(filled, ResampleSpec::downsample(r));
  const auto mask = minpool_mask(hr.valid, hr.width, hr.height, r);

  LrPair out{DepthMap(small.width, small.height),
             rescale_intrinsics(intr, small.width, small.height)};
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const double d = small.data[i];
    if (mask[i] && d > 0.0 && std::isfinite(d)) {
      out.depth.depth[i] = d;
      out.depth.valid[i] = 1;
    }
  }
  return out;
}

}  // namespace pnsr
