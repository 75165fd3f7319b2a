#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pnsr/geometry.hpp"

namespace pnsr {

/// Planar multi-channel real image.
struct Image {
  int channels = 1;
  int width = 0;
  int height = 0;
  std::vector<double> data;

  Image() = default;
  Image(int channels, int width, int height, double fill = 0.0);

  std::size_t plane_size() const noexcept {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  std::span<double> plane(int c) {
    return {data.data() + static_cast<std::size_t>(c) * plane_size(), plane_size()};
  }
  std::span<const double> plane(int c) const {
    return {data.data() + static_cast<std::size_t>(c) * plane_size(), plane_size()};
  }
  double& at(int c, int u, int v) {
    return data[static_cast<std::size_t>(c) * plane_size() +
                static_cast<std::size_t>(v) * static_cast<std::size_t>(width) + static_cast<std::size_t>(u)];
  }
  double at(int c, int u, int v) const {
    return data[static_cast<std::size_t>(c) * plane_size() +
                static_cast<std::size_t>(v) * static_cast<std::size_t>(width) + static_cast<std::size_t>(u)];
  }

  friend bool operator==(const Image&, const Image&) = default;
};

/// Cubic-convolution free parameter giving the Catmull-Rom spline.
inline constexpr double kCatmullRom = -0.5;

/// Resampling factor num/den (1/4 downsamples by four, 4/1 upsamples).
struct ResampleSpec {
  int num = 1;
  int den = 1;
  double a = kCatmullRom;

  static ResampleSpec upsample(int r) { return {r, 1, kCatmullRom}; }
  static ResampleSpec downsample(int r) { return {1, r, kCatmullRom}; }

  double factor() const noexcept { return static_cast<double>(num) / den; }
  /// round(size * num / den); throws ArgumentError when that is below 1.
  int output_size(int input_size) const;
};

/// Keys' cubic convolution kernel W(x) with free parameter a.
double cubic_kernel(double x, double a = kCatmullRom);

/// Weights of the four taps at offsets -1, 0, +1, +2 for fractional phase t.
std::array<double, 4> cubic_taps(double t, double a = kCatmullRom);

/// Separable cubic resize to an exact output size.
///
/// Cell-centre mapping src = (dst + 0.5) / scale - 0.5, clamp-to-edge borders.
/// When shrinking along an axis the kernel is stretched by 1/scale and the
/// weights renormalized (anti-aliased). Channels are processed independently.
Image bicubic_resize_to(const Image& img, int out_width, int out_height, double a = kCatmullRom);

Image bicubic_resize(const Image& img, const ResampleSpec& spec);

/// LR pixel is valid iff every pixel of its r x r HR window is valid.
std::vector<std::uint8_t> minpool_mask(std::span<const std::uint8_t> valid, int width, int height,
                                       int r);

/// Throws ArgumentError unless r is one of 4, 8, 16.
void require_supported_scale(int r);

struct LrPair {
  DepthMap depth;
  Intrinsics intrinsics;
};

/// Degrades an HR observation: fill invalid depths, cubic downsample by r,
/// min-pool the mask and rescale the intrinsics.
LrPair make_lr_pair(const DepthMap& hr, const Intrinsics& intr, int r);

}  // namespace pnsr
