#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "pnsr/geometry.hpp"
#include "pnsr/pncc.hpp"
#include "pnsr/sr_model.hpp"

namespace pnsr {

/// Plane through (0, 0, depth) with depth changing by slope_x / slope_y metres
/// per metre of camera X / Y: z = depth + slope_x X + slope_y Y.
struct SlantedPlane {
  double depth = 2.0;
  double slope_x = 0.0;
  double slope_y = 0.0;
};

/// Sphere in front of an optional frontal background wall (0 = no wall).
struct Sphere {
  double center_x = 0.0;
  double center_y = 0.0;
  double center_z = 3.0;
  double radius = 1.0;
  double background = 0.0;
};

/// Two frontal planes split by the image line through (edge_u, edge_v) at
/// `angle` radians; pixels on the positive side see `near`, the rest `far`.
struct StepEdge {
  double edge_u = 0.0;
  double edge_v = 0.0;
  double angle = 0.0;
  double near = 1.5;
  double far = 3.0;
};

/// Slanted plane with a region, cut by a step-edge line, raised by `offset`
/// metres toward the camera.
struct Composite {
  SlantedPlane plane;
  StepEdge edge;  // only the line parameters are used
  double offset = 0.5;
};

using SceneGeometry = std::variant<SlantedPlane, Sphere, StepEdge, Composite>;

struct SceneSpec {
  SceneGeometry geometry;
  int width = 128;
  int height = 96;
  double dropout_rate = 0.0;
  std::uint64_t seed = 0;

  std::string kind() const;
  void validate() const;
};

/// Analytic depth of the ray through pixel (u, v), or 0 where the surface is
/// not hit.
double analytic_depth(const SceneGeometry& g, const Intrinsics& intr, double u, double v);

/// Renders analytic depth and applies seeded per-pixel dropout.
DepthMap render(const SceneSpec& spec, const Intrinsics& intr);

/// Intrinsics used for generated scenes (a 4:3 sensor with ~63 degree FOV).
Intrinsics default_intrinsics(int width, int height);

struct DatasetOptions {
  int width = 128;
  int height = 96;
  double dropout_rate = 0.002;
  double s = kDefaultScaleFactor;
};

/// Random scene of any kind, drawn from `seed`.
SceneSpec random_scene(std::uint64_t seed, const DatasetOptions& opts);

struct DatasetItem {
  SceneSpec spec;
  Intrinsics hr_intrinsics;
  Intrinsics lr_intrinsics;
  DepthMap hr_depth;
  DepthMap lr_depth;
  PnccImage hr;
  PnccImage lr;
};

/// Normalization shared by an (LR, HR) pair: fitted to the union of both
/// coordinate extents so both members encode into [0, 1].
NormalizationParams pair_normalization(const DepthMap& hr, const Intrinsics& hr_intr,
                                       const DepthMap& lr, const Intrinsics& lr_intr, double s);

/// Renders, degrades and encodes one scene.
DatasetItem make_item(const SceneSpec& spec, int r, double s);

/// Scene specs for a dataset; scene i uses a seed derived from (seed, i).
std::vector<SceneSpec> dataset_specs(int n_scenes, std::uint64_t seed, const DatasetOptions& opts = {});

std::vector<DatasetItem> build_dataset(int n_scenes, int r, std::uint64_t seed,
                                       const DatasetOptions& opts = {});
std::vector<DatasetItem> build_dataset(const std::vector<SceneSpec>& specs, int r, double s);

std::vector<TrainSample> to_train_samples(const std::vector<DatasetItem>& items);

}  // namespace pnsr
