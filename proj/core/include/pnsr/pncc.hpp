#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pnsr/geometry.hpp"

namespace pnsr {

/// Default metric divisor applied before normalization (indoor sensor range).
inline constexpr double kDefaultScaleFactor = 10.0;

/// Maps scaled camera coordinates into [0, 1]^3 and back.
///
/// A scaled coordinate P (camera XYZ divided by `s`) becomes (P - offset) / scale.
/// One shared `scale` for all three axes keeps relative axis extents intact.
struct NormalizationParams {
  std::array<double, 3> offset{0.0, 0.0, 0.0};
  double scale = 1.0;
  double s = kDefaultScaleFactor;
  /// True when every encoded point coincided and `scale` was forced to 1.
  bool degenerate = false;

  void validate() const;

  double normalize(std::size_t axis, double scaled) const noexcept {
    return (scaled - offset[axis]) / scale;
  }
  /// Back to metric camera coordinates.
  double denormalize(std::size_t axis, double channel) const noexcept {
    return (channel * scale + offset[axis]) * s;
  }

  friend bool operator==(const NormalizationParams&, const NormalizationParams&) = default;
};

/// Per-axis bounds of scaled camera coordinates over a set of valid pixels.
struct CoordinateExtent {
  std::array<double, 3> lo{};
  std::array<double, 3> hi{};
  bool empty = true;

  void include(const std::array<double, 3>& p) noexcept;
  void merge(const CoordinateExtent& other) noexcept;
};

/// PNCC image: planar channels X, Y, Z (R, G, B) each `width * height` long.
/// Invalid pixels hold filled values copied from their nearest valid pixel.
struct PnccImage {
  int width = 0;
  int height = 0;
  std::vector<double> channels;
  std::vector<std::uint8_t> valid;
  std::optional<NormalizationParams> norm;

  PnccImage() = default;
  PnccImage(int width, int height);

  std::size_t plane_size() const noexcept {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  std::size_t valid_count() const noexcept;

  std::span<double> plane(std::size_t c) { return {channels.data() + c * plane_size(), plane_size()}; }
  std::span<const double> plane(std::size_t c) const {
    return {channels.data() + c * plane_size(), plane_size()};
  }
  double at(std::size_t c, int u, int v) const noexcept {
    return channels[c * plane_size() + static_cast<std::size_t>(v) * static_cast<std::size_t>(width) +
                    static_cast<std::size_t>(u)];
  }

  /// Throws StateError when no normalization parameters are attached.
  const NormalizationParams& require_norm() const;

  friend bool operator==(const PnccImage&, const PnccImage&) = default;
};

/// Scaled camera coordinates ((u - cx) d / (fx s), (v - cy) d / (fy s), d / s).
std::array<double, 3> scaled_coordinates(int u, int v, double depth, const Intrinsics& intr,
                                         double s) noexcept;

CoordinateExtent coordinate_extent(const DepthMap& d, const Intrinsics& intr, double s);

/// Offsets at the per-axis minima and one shared scale equal to the largest
/// axis extent. An all-coincident extent yields scale 1 with `degenerate` set.
NormalizationParams fit_normalization(const CoordinateExtent& extent, double s);

/// Encodes with normalization fitted to this map alone.
PnccImage encode(const DepthMap& d, const Intrinsics& intr, double s = kDefaultScaleFactor);

/// Encodes with caller-provided normalization (shared between image pairs).
/// Throws RangeError if any valid pixel falls outside [0, 1] under `norm`.
PnccImage encode_with(const DepthMap& d, const Intrinsics& intr, const NormalizationParams& norm);

/// Depth from the Z channel of valid pixels; invalid pixels become sentinels.
DepthMap decode_depth(const PnccImage& p);

/// One metric point per valid pixel, row-major.
PointCloud decode_pointcloud(const PnccImage& p);

/// Replaces every invalid pixel's channel values by those of the nearest valid
/// pixel in Euclidean pixel distance. Ties resolve to the valid pixel first in
/// row-major order. `channels` is planar with `num_channels` planes.
void fill_invalid(std::span<double> channels, std::size_t num_channels,
                  std::span<const std::uint8_t> valid, int width, int height);

/// For every pixel, the row-major index of the nearest valid pixel (itself
/// when valid) under the fill_invalid metric and tie rule.
std::vector<std::size_t> nearest_valid_index(std::span<const std::uint8_t> valid, int width,
                                             int height);

}  // namespace pnsr
