#include "pnsr/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pnsr/error.hpp"

namespace pnsr {

void Intrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy)) {
    throw ArgumentError("intrinsics: focal lengths must be positive and finite");
  }
  if (!std::isfinite(cx) || !std::isfinite(cy)) {
    throw ArgumentError("intrinsics: principal point must be finite");
  }
  if (width < 1 || height < 1) {
    throw ArgumentError("intrinsics: reference resolution must be at least 1x1");
  }
}

DepthMap::DepthMap(int w, int h) : width(w), height(h) {
  if (w < 0 || h < 0) throw ArgumentError("depth map: negative dimensions");
  depth.assign(pixel_count(), 0.0);
  valid.assign(pixel_count(), 0);
}

std::size_t DepthMap::valid_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(valid.begin(), valid.end(),
                                                [](std::uint8_t m) { return m != 0; }));
}

void DepthMap::validate() const {
  if (width < 0 || height < 0 || depth.size() != pixel_count() || valid.size() != pixel_count()) {
    throw ArgumentError("depth map: buffer sizes do not match " + std::to_string(width) + "x" +
                        std::to_string(height));
  }
  for (std::size_t i = 0; i < depth.size(); ++i) {
    if (valid[i] && !(depth[i] > 0.0 && std::isfinite(depth[i]))) {
      throw ArgumentError("depth map: valid pixel " + std::to_string(i) +
                          " has non-positive or non-finite depth");
    }
  }
}

namespace {

// (value * target) / reference evaluated in extended precision so the result
// carries a single rounding to double.
double scale_field(double value, int target, int reference) {
  const long double scaled =
      static_cast<long double>(value) * target / static_cast<long double>(reference);
  return static_cast<double>(scaled);
}

}  // namespace

Intrinsics rescale_intrinsics(const Intrinsics& intr, int target_w, int target_h) {
  intr.validate();
  if (target_w < 1 || target_h < 1) {
    throw ArgumentError("rescale_intrinsics: target dimensions must be positive, got " +
                        std::to_string(target_w) + "x" + std::to_string(target_h));
  }
  Intrinsics out;
  out.fx = scale_field(intr.fx, target_w, intr.width);
  out.cx = scale_field(intr.cx, target_w, intr.width);
  out.fy = scale_field(intr.fy, target_h, intr.height);
  out.cy = scale_field(intr.cy, target_h, intr.height);
  out.width = target_w;
  out.height = target_h;
  return out;
}

Intrinsics crop_intrinsics(const Intrinsics& intr, int x0, int y0, int width, int height) {
  if (width < 1 || height < 1) throw ArgumentError("crop_intrinsics: empty window");
  if (x0 < 0 || y0 < 0 || x0 + width > intr.width || y0 + height > intr.height) {
    throw ArgumentError("crop_intrinsics: window leaves the image");
  }
  Intrinsics out = intr;
  out.cx -= x0;
  out.cy -= y0;
  out.width = width;
  out.height = height;
  return out;
}

void require_matching_resolution(const DepthMap& d, const Intrinsics& intr) {
  if (d.width != intr.width || d.height != intr.height) {
    throw ArgumentError("depth map is " + std::to_string(d.width) + "x" +
                        std::to_string(d.height) + " but intrinsics describe " +
                        std::to_string(intr.width) + "x" + std::to_string(intr.height));
  }
}

PointCloud backproject(const DepthMap& d, const Intrinsics& intr) {
  intr.validate();
  require_matching_resolution(d, intr);
  PointCloud cloud;
  cloud.points.reserve(d.valid_count());
  for (int v = 0; v < d.height; ++v) {
    for (int u = 0; u < d.width; ++u) {
      if (!d.is_valid(u, v)) continue;
      cloud.points.push_back(backproject_pixel(u, v, d.at(u, v), intr));
    }
  }
  return cloud;
}

}  // namespace pnsr
