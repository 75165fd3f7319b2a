#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pnsr/geometry.hpp"
#include "pnsr/pncc.hpp"
#include "pnsr/sr_model.hpp"
#include "pnsr/synthdata.hpp"

namespace pnsr::io {

using Bytes = std::vector<std::uint8_t>;

/// Default depth quantum for DEPTH16 files: one count per millimetre.
inline constexpr double kDefaultUnitScale = 0.001;
inline constexpr std::uint16_t kCheckpointVersion = 1;

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const Bytes& bytes);
void write_text(const std::filesystem::path& path, const std::string& text);

// DEPTH16: binary 16-bit PGM ("P5", maxval 65535, big-endian samples).
// Count 0 marks an invalid pixel; other counts are depth / unit_scale.
Bytes encode_depth16(const DepthMap& d, double unit_scale = kDefaultUnitScale);
DepthMap decode_depth16(const Bytes& bytes, double unit_scale = kDefaultUnitScale);
void write_depth16(const std::filesystem::path& path, const DepthMap& d,
                   double unit_scale = kDefaultUnitScale);
DepthMap read_depth16(const std::filesystem::path& path, double unit_scale = kDefaultUnitScale);

// PNCC48: 16-bit-per-channel binary PPM ("P6") plus a JSON sidecar at
// "<path>.json" holding the normalization and the run-length coded mask.
std::filesystem::path pncc_sidecar_path(const std::filesystem::path& image_path);
void write_pncc48(const std::filesystem::path& path, const PnccImage& p);
PnccImage read_pncc48(const std::filesystem::path& path);

// ASCII PLY with double x, y, z vertex properties.
std::string encode_ply(const PointCloud& pc);
PointCloud decode_ply(const std::string& text);
void write_ply(const std::filesystem::path& path, const PointCloud& pc);
PointCloud read_ply(const std::filesystem::path& path);

std::string encode_intrinsics(const Intrinsics& intr);
Intrinsics decode_intrinsics(const std::string& text);
void write_intrinsics(const std::filesystem::path& path, const Intrinsics& intr);
Intrinsics read_intrinsics(const std::filesystem::path& path);

struct Checkpoint {
  SrModel model;
  TrainConfig train;
};

// "PNSR", u16 version, u32 header length, JSON header, f32 LE blob
// (parameters, then Adam first and second moments). All integers little-endian.
Bytes encode_checkpoint(const SrModel& model, const TrainConfig& train);
Checkpoint decode_checkpoint(const Bytes& bytes);
void write_checkpoint(const std::filesystem::path& path, const SrModel& model,
                      const TrainConfig& train);
Checkpoint read_checkpoint(const std::filesystem::path& path);

struct ManifestEntry {
  SceneSpec spec;
  std::string depth_file;
  std::string intrinsics_file;
};

struct Manifest {
  std::uint64_t seed = 0;
  DatasetOptions options;
  std::vector<ManifestEntry> scenes;
};

std::string encode_manifest(const Manifest& m);
Manifest decode_manifest(const std::string& text);
void write_manifest(const std::filesystem::path& path, const Manifest& m);
Manifest read_manifest(const std::filesystem::path& path);

}  // namespace pnsr::io
