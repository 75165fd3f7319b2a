#include "pnsr/pncc.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pnsr/error.hpp"
#include "pnsr/kdtree.hpp"

namespace pnsr {

void NormalizationParams::validate() const {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ArgumentError("normalization: scale must be positive and finite");
  }
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw ArgumentError("normalization: scale factor s must be positive and finite");
  }
  for (double o : offset) {
    if (!std::isfinite(o)) throw ArgumentError("normalization: non-finite offset");
  }
}

void CoordinateExtent::include(const std::array<double, 3>& p) noexcept {
  if (empty) {
    lo = p;
    hi = p;
    empty = false;
    return;
  }
  for (std::size_t k = 0; k < 3; ++k) {
    lo[k] = std::min(lo[k], p[k]);
    hi[k] = std::max(hi[k], p[k]);
  }
}

void CoordinateExtent::merge(const CoordinateExtent& other) noexcept {
  if (other.empty) return;
  include(other.lo);
  include(other.hi);
}

PnccImage::PnccImage(int w, int h) : width(w), height(h) {
  if (w < 0 || h < 0) throw ArgumentError("pncc image: negative dimensions");
  channels.assign(3 * plane_size(), 0.0);
  valid.assign(plane_size(), 0);
}

std::size_t PnccImage::valid_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(valid.begin(), valid.end(),
                                                [](std::uint8_t m) { return m != 0; }));
}

const NormalizationParams& PnccImage::require_norm() const {
  if (!norm) throw StateError("pncc image carries no normalization parameters");
  return *norm;
}

std::array<double, 3> scaled_coordinates(int u, int v, double depth, const Intrinsics& intr,
                                         double s) noexcept {
  return {(u - intr.cx) * depth / (intr.fx * s), (v - intr.cy) * depth / (intr.fy * s), depth / s};
}

CoordinateExtent coordinate_extent(const DepthMap& d, const Intrinsics& intr, double s) {
  require_matching_resolution(d, intr);
  CoordinateExtent extent;
  for (int v = 0; v < d.height; ++v) {
    for (int u = 0; u < d.width; ++u) {
      if (d.is_valid(u, v)) extent.include(scaled_coordinates(u, v, d.at(u, v), intr, s));
    }
  }
  return extent;
}

NormalizationParams fit_normalization(const CoordinateExtent& extent, double s) {
  if (extent.empty) throw EmptyInputError("fit_normalization: no valid pixels");
  NormalizationParams norm;
  norm.s = s;
  norm.offset = extent.lo;
  double widest = 0.0;
  for (std::size_t k = 0; k < 3; ++k) widest = std::max(widest, extent.hi[k] - extent.lo[k]);
  if (widest > 0.0) {
    norm.scale = widest;
  } else {
    norm.scale = 1.0;
    norm.degenerate = true;
  }
  norm.validate();
  return norm;
}

PnccImage encode(const DepthMap& d, const Intrinsics& intr, double s) {
  if (!(s > 0.0)) throw ArgumentError("encode: scale factor s must be positive");
  intr.validate();
  d.validate();
  require_matching_resolution(d, intr);
  if (d.valid_count() == 0) throw EmptyInputError("encode: depth map has no valid pixels");
  return encode_with(d, intr, fit_normalization(coordinate_extent(d, intr, s), s));
}

PnccImage encode_with(const DepthMap& d, const Intrinsics& intr, const NormalizationParams& norm) {
  intr.validate();
  norm.validate();
  d.validate();
  require_matching_resolution(d, intr);
  if (d.valid_count() == 0) throw EmptyInputError("encode: depth map has no valid pixels");

  PnccImage out(d.width, d.height);
  out.valid = d.valid;
  out.norm = norm;
  const std::size_t n = out.plane_size();
  for (int v = 0; v < d.height; ++v) {
    for (int u = 0; u < d.width; ++u) {
      if (!d.is_valid(u, v)) continue;
      const auto p = scaled_coordinates(u, v, d.at(u, v), intr, norm.s);
      const std::size_t i = d.index(u, v);
      for (std::size_t k = 0; k < 3; ++k) {
        const double c = norm.normalize(k, p[k]);
        if (!(c >= 0.0 && c <= 1.0)) {
          throw RangeError("encode: pixel (" + std::to_string(u) + ", " + std::to_string(v) +
                           ") channel " + std::to_string(k) + " normalizes to " +
                           std::to_string(c) + ", outside [0, 1]");
        }
        out.channels[k * n + i] = c;
      }
    }
  }
  fill_invalid(out.channels, 3, out.valid, out.width, out.height);
  return out;
}

DepthMap decode_depth(const PnccImage& p) {
  const NormalizationParams& norm = p.require_norm();
  DepthMap d(p.width, p.height);
  const auto z = p.plane(2);
  for (std::size_t i = 0; i < p.plane_size(); ++i) {
    if (!p.valid[i]) continue;
    d.depth[i] = norm.denormalize(2, z[i]);
    d.valid[i] = 1;
  }
  return d;
}

PointCloud decode_pointcloud(const PnccImage& p) {
  const NormalizationParams& norm = p.require_norm();
  PointCloud cloud;
  cloud.points.reserve(p.valid_count());
  const auto x = p.plane(0);
  const auto y = p.plane(1);
  const auto z = p.plane(2);
  for (std::size_t i = 0; i < p.plane_size(); ++i) {
    if (!p.valid[i]) continue;
    cloud.points.push_back(
        {norm.denormalize(0, x[i]), norm.denormalize(1, y[i]), norm.denormalize(2, z[i])});
  }
  return cloud;
}

std::vector<std::size_t> nearest_valid_index(std::span<const std::uint8_t> valid, int width,
                                             int height) {
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (width < 0 || height < 0 || valid.size() != n) {
    throw ArgumentError("fill_invalid: mask size does not match dimensions");
  }
  using Tree = KdTree<double, 2>;
  std::vector<Tree::Point> sources;
  std::vector<std::size_t> source_pixel;
  for (std::size_t i = 0; i < n; ++i) {
    if (!valid[i]) continue;
    const auto w = static_cast<std::size_t>(width);
    sources.push_back({static_cast<double>(i % w), static_cast<double>(i / w)});
    source_pixel.push_back(i);
  }
  if (sources.empty()) throw EmptyInputError("fill_invalid: no valid pixels to fill from");

  // Sources are enumerated in row-major order, so the tree's smallest-index
  // tie rule is exactly the row-major tie rule. Integer coordinates keep all
  // squared distances exact.
  const Tree tree(sources);
  std::vector<std::size_t> nearest(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (valid[i]) {
      nearest[i] = i;
      continue;
    }
    const auto w = static_cast<std::size_t>(width);
    const auto hit = tree.nearest({static_cast<double>(i % w), static_cast<double>(i / w)});
    nearest[i] = source_pixel[hit.index];
  }
  return nearest;
}

void fill_invalid(std::span<double> channels, std::size_t num_channels,
                  std::span<const std::uint8_t> valid, int width, int height) {
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (channels.size() != n * num_channels) {
    throw ArgumentError("fill_invalid: channel buffer size does not match dimensions");
  }
  const auto nearest = nearest_valid_index(valid, width, height);
  for (std::size_t c = 0; c < num_channels; ++c) {
    double* plane = channels.data() + c * n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!valid[i]) plane[i] = plane[nearest[i]];
    }
  }
}

}  // namespace pnsr
