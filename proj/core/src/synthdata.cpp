#include "pnsr/synthdata.hpp"

#include <cmath>
#include <numbers>

#include "pnsr/error.hpp"
#include "pnsr/random.hpp"
#include "pnsr/resample.hpp"

namespace pnsr {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double plane_depth(const SlantedPlane& p, double a, double b, double depth) {
  const double denom = 1.0 - p.slope_x * a - p.slope_y * b;
  if (!(denom > 0.0)) return 0.0;
  return depth / denom;
}

bool positive_side(const StepEdge& e, double u, double v) {
  return std::cos(e.angle) * (u - e.edge_u) + std::sin(e.angle) * (v - e.edge_v) >= 0.0;
}

}  // namespace

std::string SceneSpec::kind() const {
  return std::visit(overloaded{[](const SlantedPlane&) { return std::string("slanted_plane"); },
                               [](const Sphere&) { return std::string("sphere"); },
                               [](const StepEdge&) { return std::string("step_edge"); },
                               [](const Composite&) { return std::string("composite"); }},
                    geometry);
}

void SceneSpec::validate() const {
  if (width < 1 || height < 1) throw ArgumentError("scene: resolution must be at least 1x1");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw ArgumentError("scene: dropout rate must lie in [0, 1)");
  }
  std::visit(overloaded{[](const SlantedPlane& p) {
                          if (!(p.depth > 0.0)) throw ArgumentError("scene: plane depth must be positive");
                        },
                        [](const Sphere& s) {
                          if (!(s.radius > 0.0)) throw ArgumentError("scene: sphere radius must be positive");
                          if (s.background < 0.0) throw ArgumentError("scene: negative background depth");
                        },
                        [](const StepEdge& e) {
                          if (!(e.near > 0.0 && e.far > 0.0)) {
                            throw ArgumentError("scene: step depths must be positive");
                          }
                        },
                        [](const Composite& c) {
                          if (!(c.plane.depth - c.offset > 0.0 && c.plane.depth > 0.0)) {
                            throw ArgumentError("scene: composite offset would put the surface behind the camera");
                          }
                        }},
             geometry);
}

double analytic_depth(const SceneGeometry& g, const Intrinsics& intr, double u, double v) {
  const double a = (u - intr.cx) / intr.fx;
  const double b = (v - intr.cy) / intr.fy;
  return std::visit(
      overloaded{
          [&](const SlantedPlane& p) { return plane_depth(p, a, b, p.depth); },
          [&](const Sphere& s) {
            // |z (a, b, 1) - C|^2 = R^2, nearest root.
            const double rr = a * a + b * b + 1.0;
            const double rc = a * s.center_x + b * s.center_y + s.center_z;
            const double cc = s.center_x * s.center_x + s.center_y * s.center_y + s.center_z * s.center_z;
            const double disc = rc * rc - rr * (cc - s.radius * s.radius);
            double z = 0.0;
            if (disc >= 0.0) z = (rc - std::sqrt(disc)) / rr;
            if (z > 0.0 && (s.background <= 0.0 || z < s.background)) return z;
            return s.background > 0.0 ? s.background : 0.0;
          },
          [&](const StepEdge& e) { return positive_side(e, u, v) ? e.near : e.far; },
          [&](const Composite& c) {
            const double depth = positive_side(c.edge, u, v) ? c.plane.depth - c.offset : c.plane.depth;
            return plane_depth(c.plane, a, b, depth);
          }},
      g);
}

DepthMap render(const SceneSpec& spec, const Intrinsics& intr) {
  spec.validate();
  intr.validate();
  if (spec.width != intr.width || spec.height != intr.height) {
    throw ArgumentError("render: scene resolution does not match the intrinsics");
  }
  DepthMap d(spec.width, spec.height);
  Rng dropout(splitmix64(spec.seed ^ 0xD50F0D7ULL));
  for (int v = 0; v < spec.height; ++v) {
    for (int u = 0; u < spec.width; ++u) {
      const double z = analytic_depth(spec.geometry, intr, u, v);
      const bool dropped = spec.dropout_rate > 0.0 && dropout.bernoulli(spec.dropout_rate);
      if (z > 0.0 && std::isfinite(z) && !dropped) d.set(u, v, z);
    }
  }
  return d;
}

Intrinsics default_intrinsics(int width, int height) {
  Intrinsics intr;
  intr.fx = 0.81 * width;
  intr.fy = 0.81 * width;
  intr.cx = 0.5 * width;
  intr.cy = 0.5 * height;
  intr.width = width;
  intr.height = height;
  return intr;
}

SceneSpec random_scene(std::uint64_t seed, const DatasetOptions& opts) {
  Rng rng(seed);
  SceneSpec spec;
  spec.width = opts.width;
  spec.height = opts.height;
  spec.dropout_rate = opts.dropout_rate;
  spec.seed = seed;

  const auto random_plane = [&] {
    SlantedPlane p;
    p.depth = rng.uniform(1.5, 5.0);
    p.slope_x = rng.uniform(-0.6, 0.6);
    p.slope_y = rng.uniform(-0.6, 0.6);
    return p;
  };
  const auto random_edge = [&] {
    StepEdge e;
    e.edge_u = rng.uniform(0.25, 0.75) * opts.width;
    e.edge_v = rng.uniform(0.25, 0.75) * opts.height;
    e.angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    e.near = rng.uniform(1.0, 3.0);
    e.far = e.near + rng.uniform(0.3, 3.0);
    return e;
  };

  switch (rng.below(4)) {
    case 0:
      spec.geometry = random_plane();
      break;
    case 1: {
      Sphere s;
      s.center_z = rng.uniform(2.5, 4.5);
      s.radius = rng.uniform(0.2, 0.35) * s.center_z;
      s.center_x = rng.uniform(-0.3, 0.3) * s.center_z;
      s.center_y = rng.uniform(-0.2, 0.2) * s.center_z;
      s.background = s.center_z + s.radius + rng.uniform(0.3, 3.0);
      spec.geometry = s;
      break;
    }
    case 2:
      spec.geometry = random_edge();
      break;
    default: {
      Composite c;
      c.plane = random_plane();
      c.edge = random_edge();
      c.offset = rng.uniform(0.2, std::min(1.2, c.plane.depth - 0.5));
      spec.geometry = c;
      break;
    }
  }
  return spec;
}

NormalizationParams pair_normalization(const DepthMap& hr, const Intrinsics& hr_intr,
                                       const DepthMap& lr, const Intrinsics& lr_intr, double s) {
  CoordinateExtent extent = coordinate_extent(hr, hr_intr, s);
  extent.merge(coordinate_extent(lr, lr_intr, s));
  return fit_normalization(extent, s);
}

DatasetItem make_item(const SceneSpec& spec, int r, double s) {
  DatasetItem item;
  item.spec = spec;
  item.hr_intrinsics = default_intrinsics(spec.width, spec.height);
  item.hr_depth = render(spec, item.hr_intrinsics);
  LrPair lr = make_lr_pair(item.hr_depth, item.hr_intrinsics, r);
  item.lr_depth = std::move(lr.depth);
  item.lr_intrinsics = lr.intrinsics;
  if (item.lr_depth.valid_count() == 0) {
    throw EmptyInputError("scene " + std::to_string(spec.seed) + ": no valid pixels survive x" +
                          std::to_string(r) + " degradation");
  }
  const NormalizationParams norm =
      pair_normalization(item.hr_depth, item.hr_intrinsics, item.lr_depth, item.lr_intrinsics, s);
  item.hr = encode_with(item.hr_depth, item.hr_intrinsics, norm);
  item.lr = encode_with(item.lr_depth, item.lr_intrinsics, norm);
  return item;
}

std::vector<SceneSpec> dataset_specs(int n_scenes, std::uint64_t seed, const DatasetOptions& opts) {
  if (n_scenes < 0) throw ArgumentError("dataset: negative scene count");
  std::vector<SceneSpec> specs;
  specs.reserve(static_cast<std::size_t>(n_scenes));
  for (int i = 0; i < n_scenes; ++i) {
    specs.push_back(random_scene(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(i))), opts));
  }
  return specs;
}

std::vector<DatasetItem> build_dataset(const std::vector<SceneSpec>& specs, int r, double s) {
  require_supported_scale(r);
  std::vector<DatasetItem> items;
  items.reserve(specs.size());
  for (const auto& spec : specs) items.push_back(make_item(spec, r, s));
  return items;
}

std::vector<DatasetItem> build_dataset(int n_scenes, int r, std::uint64_t seed,
                                       const DatasetOptions& opts) {
  require_supported_scale(r);
  return build_dataset(dataset_specs(n_scenes, seed, opts), r, opts.s);
}

std::vector<TrainSample> to_train_samples(const std::vector<DatasetItem>& items) {
  std::vector<TrainSample> out;
  out.reserve(items.size());
  for (const auto& it : items) out.push_back({it.lr, it.hr, it.hr_intrinsics});
  return out;
}

}  // namespace pnsr
