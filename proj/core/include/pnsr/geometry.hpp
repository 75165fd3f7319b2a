#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace pnsr {

/// Pinhole camera parameters tied to the resolution they were calibrated at.
/// Pixel (u, v) is taken to sit at continuous position (u, v); there is no
/// half-pixel offset anywhere in the projection model.
struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  /// Throws ArgumentError unless fx, fy > 0 and width, height >= 1.
  void validate() const;

  friend bool operator==(const Intrinsics&, const Intrinsics&) = default;
};

/// Metric depth (meters) plus an explicit validity mask. The mask is
/// authoritative; invalid pixels carry the sentinel depth 0.0.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> depth;
  std::vector<std::uint8_t> valid;

  DepthMap() = default;
  /// All-invalid map of the given size.
  DepthMap(int width, int height);

  std::size_t index(int u, int v) const noexcept {
    return static_cast<std::size_t>(v) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(u);
  }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  std::size_t valid_count() const noexcept;

  bool is_valid(int u, int v) const noexcept { return valid[index(u, v)] != 0; }
  double at(int u, int v) const noexcept { return depth[index(u, v)]; }

  void set(int u, int v, double d) {
    depth[index(u, v)] = d;
    valid[index(u, v)] = 1;
  }
  void invalidate(int u, int v) {
    depth[index(u, v)] = 0.0;
    valid[index(u, v)] = 0;
  }

  /// Throws ArgumentError when buffer sizes disagree with the dimensions or a
  /// valid pixel has non-positive / non-finite depth.
  void validate() const;

  friend bool operator==(const DepthMap&, const DepthMap&) = default;
};

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Point3&, const Point3&) = default;
};

struct PointCloud {
  std::vector<Point3> points;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
};

/// Scales fx, cx by target_w / width and fy, cy by target_h / height.
Intrinsics rescale_intrinsics(const Intrinsics& intr, int target_w, int target_h);

/// Intrinsics of the sub-window starting at (x0, y0) with the given size.
Intrinsics crop_intrinsics(const Intrinsics& intr, int x0, int y0, int width, int height);

/// Throws ArgumentError when the map resolution differs from the intrinsics.
void require_matching_resolution(const DepthMap& d, const Intrinsics& intr);

/// Camera-space point for pixel (u, v) at metric depth `depth`.
inline Point3 backproject_pixel(int u, int v, double depth, const Intrinsics& intr) noexcept {
  return {(u - intr.cx) * depth / intr.fx, (v - intr.cy) * depth / intr.fy, depth};
}

/// One point per valid pixel in row-major order; invalid pixels are skipped.
PointCloud backproject(const DepthMap& d, const Intrinsics& intr);

}  // namespace pnsr
