#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pnsr/geometry.hpp"
#include "pnsr/layers.hpp"
#include "pnsr/pncc.hpp"
#include "pnsr/tensor.hpp"

namespace pnsr {

/// What the network predicts: all three PNCC channels, or only Z.
enum class HeadMode { Xyz, Z };
/// What the network sees: the full PNCC image, or only its depth (Z) channel.
enum class InputMode { Pncc, Depth };

std::string to_string(HeadMode mode);
std::string to_string(InputMode mode);
HeadMode parse_head_mode(const std::string& s);
InputMode parse_input_mode(const std::string& s);

struct ModelConfig {
  HeadMode head = HeadMode::Z;
  InputMode input = InputMode::Pncc;
  int features = 32;
  /// Total conv layers including the first and the upsampling head.
  int num_layers = 6;
  int kernel = 3;
  int scale = 4;
  /// Constant multiplier on the learned residual before it meets the skip path.
  double residual_scale = 0.01;

  int in_channels() const noexcept { return input == InputMode::Pncc ? 3 : 1; }
  int out_channels() const noexcept { return head == HeadMode::Xyz ? 3 : 1; }
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Closed-form number of learnable scalars for a configuration.
long long param_count(const ModelConfig& cfg) noexcept;

struct ConvParams {
  Tensor weight;
  Tensor bias;
};

/// Residual convolutional super-resolution network.
///
/// conv+ReLU stack, then a conv emitting out_channels * scale^2 maps that are
/// pixel-shuffled to the HR grid, multiplied by residual_scale and added to
/// the cubic upsample of the input channels being predicted. The head conv starts at zero, so an untrained
/// model reproduces the cubic baseline exactly.
class SrModel {
 public:
  SrModel(const ModelConfig& cfg, std::uint64_t seed);

  const ModelConfig& config() const noexcept { return cfg_; }
  std::vector<ConvParams>& layers() noexcept { return layers_; }
  const std::vector<ConvParams>& layers() const noexcept { return layers_; }
  AdamState& optimizer() noexcept { return adam_; }
  const AdamState& optimizer() const noexcept { return adam_; }

  long long param_count() const noexcept;

  /// All parameters in declaration order: per layer, weights then bias.
  std::vector<double> flat_params() const;
  void set_flat_params(std::span<const double> values);

  friend bool operator==(const SrModel& a, const SrModel& b);

 private:
  ModelConfig cfg_;
  std::vector<ConvParams> layers_;
  AdamState adam_;
};

/// Network input plus the geometry needed to lift a predicted Z to XYZ.
struct SrInput {
  Tensor lr;  // (in_channels, h, w), normalized values
  Intrinsics hr_intrinsics;
  NormalizationParams norm;
};

/// Builds the input tensor for `mode` from an LR PNCC image (Depth keeps only Z).
SrInput make_input(const PnccImage& lr, InputMode mode, const Intrinsics& hr_intrinsics);

/// Residual skip path: cubic upsample of the predicted channels. For XYZ
/// output from depth-only input, X and Y are re-derived from the upsampled Z
/// along the HR camera rays.
Tensor skip_path(const ModelConfig& cfg, const SrInput& in);

/// HR prediction in normalized units, (out_channels, r h, r w).
Tensor forward(const SrModel& model, const SrInput& in);

/// Forward pass keeping activations, for training.
struct ForwardTrace {
  std::vector<Tensor> activations;  // input to each conv layer
  Tensor output;
};
ForwardTrace forward_trace(const SrModel& model, const SrInput& in);

/// Flat parameter gradient (declaration order) given dL/d(output).
std::vector<double> backward(const SrModel& model, const ForwardTrace& trace,
                             const Tensor& grad_output);

struct TrainConfig {
  double learning_rate = 1e-3;
  int epochs = 20;
  int batch_size = 8;
  std::uint64_t seed = 0;
  double charbonnier_eps = 1e-3;
  int scale = 4;
  HeadMode head = HeadMode::Z;
  InputMode input = InputMode::Pncc;
  /// LR patch side; images smaller than this are used whole.
  int patch_size = 64;
  int patches_per_scene = 1;

  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// One (LR, HR) pair sharing normalization; HR validity is the loss mask.
struct TrainSample {
  PnccImage lr;
  PnccImage hr;
  Intrinsics hr_intrinsics;
};

struct TrainResult {
  std::vector<double> epoch_loss;
};

using EpochCallback = std::function<void(int epoch, double mean_loss)>;

/// Seeded minibatch Adam on the masked Charbonnier loss. The model's config
/// must agree with cfg. Returns the mean loss of every epoch.
TrainResult train(SrModel& model, std::span<const TrainSample> dataset, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

/// Decoded HR output of the pipeline.
struct Prediction {
  PnccImage pncc;
  DepthMap depth;
  PointCloud cloud;
};

/// LR mask replicated over r x r blocks: the pixels a prediction vouches for.
std::vector<std::uint8_t> upsample_mask(std::span<const std::uint8_t> lr_valid, int width,
                                        int height, int r);

/// Decodes a normalized HR network output (clamped to [0, 1]).
/// XYZ head: a PNCC image under the input normalization. Z head: depth from Z,
/// re-encoded through the HR intrinsics.
Prediction decode_prediction(const Tensor& output, HeadMode head, const SrInput& in,
                             std::span<const std::uint8_t> valid);

/// Full inference: input, network, decode.
Prediction predict(const SrModel& model, const PnccImage& lr, const Intrinsics& hr_intrinsics);

/// Cubic-upsampling baseline decoded the same way as a Z-head prediction.
Prediction bicubic_baseline(const PnccImage& lr, const Intrinsics& hr_intrinsics, int scale);

}  // namespace pnsr
