#include "pnsr/sr_model.hpp"

#include <algorithm>
#include <cmath>

#include "pnsr/error.hpp"
#include "pnsr/metrics.hpp"
#include "pnsr/parallel.hpp"
#include "pnsr/random.hpp"
#include "pnsr/resample.hpp"

namespace pnsr {

std::string to_string(HeadMode mode) { return mode == HeadMode::Xyz ? "xyz" : "z"; }
std::string to_string(InputMode mode) { return mode == InputMode::Pncc ? "pncc" : "depth"; }

HeadMode parse_head_mode(const std::string& s) {
  if (s == "xyz") return HeadMode::Xyz;
  if (s == "z") return HeadMode::Z;
  throw ArgumentError("unknown head mode '" + s + "' (expected xyz or z)");
}

InputMode parse_input_mode(const std::string& s) {
  if (s == "pncc") return InputMode::Pncc;
  if (s == "depth") return InputMode::Depth;
  throw ArgumentError("unknown input mode '" + s + "' (expected pncc or depth)");
}

void ModelConfig::validate() const {
  if (features < 1) throw ArgumentError("model: features must be positive");
  if (num_layers < 1) throw ArgumentError("model: at least one conv layer is required");
  if (kernel < 1 || kernel % 2 == 0) throw ArgumentError("model: kernel size must be odd");
  if (scale < 1) throw ArgumentError("model: scale must be positive");
  if (!(residual_scale > 0.0) || !std::isfinite(residual_scale)) {
    throw ArgumentError("model: residual scale must be positive and finite");
  }
}

long long param_count(const ModelConfig& cfg) noexcept {
  const long long k2 = static_cast<long long>(cfg.kernel) * cfg.kernel;
  const long long c = cfg.features;
  const long long head_out = static_cast<long long>(cfg.out_channels()) * cfg.scale * cfg.scale;
  if (cfg.num_layers == 1) return k2 * cfg.in_channels() * head_out + head_out;
  return (k2 * cfg.in_channels() * c + c) + (cfg.num_layers - 2) * (k2 * c * c + c) +
         (k2 * c * head_out + head_out);
}

SrModel::SrModel(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  Rng rng(seed);
  const int head_out = cfg_.out_channels() * cfg_.scale * cfg_.scale;
  for (int l = 0; l < cfg_.num_layers; ++l) {
    const int in = l == 0 ? cfg_.in_channels() : cfg_.features;
    const bool last = l == cfg_.num_layers - 1;
    const int out = last ? head_out : cfg_.features;
    ConvParams p{Tensor({out, in, cfg_.kernel, cfg_.kernel}), Tensor({out})};
    if (!last) {
      // He-uniform on fan-in.
      const double bound = std::sqrt(6.0 / (static_cast<double>(in) * cfg_.kernel * cfg_.kernel));
      for (double& w : p.weight.data()) w = rng.uniform(-bound, bound);
    }
    layers_.push_back(std::move(p));
  }
}

long long SrModel::param_count() const noexcept {
  long long n = 0;
  for (const auto& l : layers_) n += static_cast<long long>(l.weight.size() + l.bias.size());
  return n;
}

std::vector<double> SrModel::flat_params() const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(param_count()));
  for (const auto& l : layers_) {
    out.insert(out.end(), l.weight.data().begin(), l.weight.data().end());
    out.insert(out.end(), l.bias.data().begin(), l.bias.data().end());
  }
  return out;
}

void SrModel::set_flat_params(std::span<const double> values) {
  if (values.size() != static_cast<std::size_t>(param_count())) {
    throw ArgumentError("set_flat_params: expected " + std::to_string(param_count()) +
                        " values, got " + std::to_string(values.size()));
  }
  std::size_t at = 0;
  for (auto& l : layers_) {
    for (double& w : l.weight.data()) w = values[at++];
    for (double& b : l.bias.data()) b = values[at++];
  }
}

bool operator==(const SrModel& a, const SrModel& b) {
  return a.cfg_ == b.cfg_ && a.flat_params() == b.flat_params() && a.adam_ == b.adam_;
}

SrInput make_input(const PnccImage& lr, InputMode mode, const Intrinsics& hr_intrinsics) {
  SrInput in{Tensor(), hr_intrinsics, lr.require_norm()};
  const std::size_t n = lr.plane_size();
  if (mode == InputMode::Pncc) {
    in.lr = Tensor({3, lr.height, lr.width});
    std::copy(lr.channels.begin(), lr.channels.begin() + static_cast<std::ptrdiff_t>(3 * n),
              in.lr.data().begin());
  } else {
    in.lr = Tensor({1, lr.height, lr.width});
    const auto z = lr.plane(2);
    std::copy(z.begin(), z.end(), in.lr.data().begin());
  }
  return in;
}

namespace {

Image tensor_channels(const Tensor& t, std::span<const int> channels) {
  Image img(static_cast<int>(channels.size()), t.dim(2), t.dim(1));
  for (std::size_t i = 0; i < channels.size(); ++i) {
    const auto src = t.data().subspan(static_cast<std::size_t>(channels[i]) * img.plane_size(),
                                      img.plane_size());
    std::copy(src.begin(), src.end(), img.plane(static_cast<int>(i)).begin());
  }
  return img;
}

void require_input_matches(const ModelConfig& cfg, const SrInput& in) {
  if (in.lr.rank() != 3 || in.lr.dim(0) != cfg.in_channels()) {
    throw StateError("model expects " + to_string(cfg.input) + " input with " +
                     std::to_string(cfg.in_channels()) + " channel(s), got " +
                     in.lr.shape_string());
  }
}

}  // namespace

Tensor skip_path(const ModelConfig& cfg, const SrInput& in) {
  require_input_matches(cfg, in);
  const int h = in.lr.dim(1);
  const int w = in.lr.dim(2);
  const int r = cfg.scale;
  const int hh = h * r;
  const int hw = w * r;

  std::vector<int> picked;
  if (cfg.input == InputMode::Pncc) {
    picked = cfg.head == HeadMode::Xyz ? std::vector<int>{0, 1, 2} : std::vector<int>{2};
  } else {
    picked = {0};
  }
  const Image up = bicubic_resize_to(tensor_channels(in.lr, picked), hw, hh);

  Tensor out({cfg.out_channels(), hh, hw});
  if (cfg.out_channels() == up.channels) {
    std::copy(up.data.begin(), up.data.end(), out.data().begin());
    return out;
  }

  // XYZ from depth-only input: lift the upsampled Z along the HR rays.
  const Intrinsics& intr = in.hr_intrinsics;
  if (intr.width != hw || intr.height != hh) {
    throw ArgumentError("skip_path: HR intrinsics do not match the upsampled size");
  }
  const NormalizationParams& norm = in.norm;
  for (int y = 0; y < hh; ++y) {
    for (int x = 0; x < hw; ++x) {
      const double z = up.at(0, x, y);
      const double d = norm.denormalize(2, z);
      const auto p = scaled_coordinates(x, y, d, intr, norm.s);
      out.at(0, y, x) = norm.normalize(0, p[0]);
      out.at(1, y, x) = norm.normalize(1, p[1]);
      out.at(2, y, x) = z;
    }
  }
  return out;
}

ForwardTrace forward_trace(const SrModel& model, const SrInput& in) {
  const ModelConfig& cfg = model.config();
  require_input_matches(cfg, in);
  ForwardTrace trace;
  trace.activations.push_back(in.lr);
  const auto& layers = model.layers();
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    trace.activations.push_back(
        relu_forward(conv2d_forward(trace.activations.back(), layers[l].weight, layers[l].bias)));
  }
  const Tensor head =
      conv2d_forward(trace.activations.back(), layers.back().weight, layers.back().bias);
  trace.output = pixel_shuffle(head, cfg.scale);
  const Tensor skip = skip_path(cfg, in);
  const double alpha = cfg.residual_scale;
  for (std::size_t i = 0; i < trace.output.size(); ++i) trace.output[i] = skip[i] + alpha * trace.output[i];
  return trace;
}

Tensor forward(const SrModel& model, const SrInput& in) {
  return forward_trace(model, in).output;
}

std::vector<double> backward(const SrModel& model, const ForwardTrace& trace,
                             const Tensor& grad_output) {
  const auto& layers = model.layers();
  if (trace.activations.size() != layers.size()) {
    throw ArgumentError("backward: trace does not belong to this model");
  }
  std::vector<std::size_t> offset(layers.size());
  std::size_t total = 0;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    offset[l] = total;
    total += layers[l].weight.size() + layers[l].bias.size();
  }
  std::vector<double> grad(total, 0.0);

  Tensor g = pixel_unshuffle(grad_output, model.config().scale);
  for (double& v : g.data()) v *= model.config().residual_scale;
  for (std::size_t l = layers.size(); l-- > 0;) {
    const Conv2dGrads cg = conv2d_backward(trace.activations[l], layers[l].weight, g);
    std::copy(cg.weight.data().begin(), cg.weight.data().end(),
              grad.begin() + static_cast<std::ptrdiff_t>(offset[l]));
    std::copy(cg.bias.data().begin(), cg.bias.data().end(),
              grad.begin() + static_cast<std::ptrdiff_t>(offset[l] + layers[l].weight.size()));
    if (l > 0) g = relu_backward(trace.activations[l], cg.x);
  }
  return grad;
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ArgumentError("train: learning rate must be finite and non-negative");
  }
  if (epochs < 1 || batch_size < 1 || patch_size < 1 || patches_per_scene < 1) {
    throw ArgumentError("train: epochs, batch size, patch size and patches per scene must be positive");
  }
  if (!(charbonnier_eps > 0.0)) throw ArgumentError("train: charbonnier eps must be positive");
  if (scale < 1) throw ArgumentError("train: scale must be positive");
}

namespace {

PnccImage crop(const PnccImage& img, int x0, int y0, int w, int h) {
  PnccImage out(w, h);
  out.norm = img.norm;
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        out.channels[static_cast<std::size_t>(c) * out.plane_size() +
                     static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)] =
            img.at(static_cast<std::size_t>(c), x0 + x, y0 + y);
      }
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      out.valid[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)] =
          img.valid[static_cast<std::size_t>(y0 + y) * static_cast<std::size_t>(img.width) +
                    static_cast<std::size_t>(x0 + x)];
    }
  }
  return out;
}

struct Patch {
  std::size_t sample = 0;
  int x0 = 0;
  int y0 = 0;
  int w = 0;
  int h = 0;
};

struct SampleGrad {
  bool used = false;
  double loss = 0.0;
  std::vector<double> grad;
};

SampleGrad patch_gradient(const SrModel& model, const TrainSample& s, const Patch& p,
                          const TrainConfig& cfg) {
  const int r = cfg.scale;
  const PnccImage lr = crop(s.lr, p.x0, p.y0, p.w, p.h);
  const PnccImage hr = crop(s.hr, p.x0 * r, p.y0 * r, p.w * r, p.h * r);
  SampleGrad out;
  if (hr.valid_count() == 0) return out;

  const SrInput in =
      make_input(lr, cfg.input, crop_intrinsics(s.hr_intrinsics, p.x0 * r, p.y0 * r, p.w * r, p.h * r));
  Tensor target({model.config().out_channels(), hr.height, hr.width});
  if (cfg.head == HeadMode::Xyz) {
    std::copy(hr.channels.begin(), hr.channels.end(), target.data().begin());
  } else {
    const auto z = hr.plane(2);
    std::copy(z.begin(), z.end(), target.data().begin());
  }
  const ForwardTrace trace = forward_trace(model, in);
  const LossResult loss = charbonnier_loss(trace.output, target, hr.valid, cfg.charbonnier_eps);
  out.used = true;
  out.loss = loss.value;
  out.grad = backward(model, trace, loss.grad);
  return out;
}

}  // namespace

TrainResult train(SrModel& model, std::span<const TrainSample> dataset, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  const ModelConfig& mc = model.config();
  if (mc.scale != cfg.scale || mc.head != cfg.head || mc.input != cfg.input) {
    throw ArgumentError("train: training config disagrees with the model architecture");
  }
  if (dataset.empty()) throw ArgumentError("train: dataset is empty");
  for (const auto& s : dataset) {
    if (s.hr.width != s.lr.width * cfg.scale || s.hr.height != s.lr.height * cfg.scale) {
      throw ArgumentError("train: every sample must share the upscale factor " +
                          std::to_string(cfg.scale));
    }
    s.lr.require_norm();
  }

  Rng rng(cfg.seed);
  TrainResult result;
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (int k = 0; k < cfg.patches_per_scene; ++k) order.push_back(i);
  }

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    std::vector<Patch> patches;
    patches.reserve(order.size());
    for (std::size_t i : order) {
      const auto& s = dataset[i];
      Patch p{i, 0, 0, std::min(cfg.patch_size, s.lr.width), std::min(cfg.patch_size, s.lr.height)};
      p.x0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(s.lr.width - p.w + 1)));
      p.y0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(s.lr.height - p.h + 1)));
      patches.push_back(p);
    }

    std::vector<double> losses;
    for (std::size_t start = 0; start < patches.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(patches.size(), start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<SampleGrad> batch(end - start);
      parallel_for(batch.size(), [&](std::size_t b) {
        const Patch& p = patches[start + b];
        batch[b] = patch_gradient(model, dataset[p.sample], p, cfg);
      });

      std::vector<double> grad(static_cast<std::size_t>(model.param_count()), 0.0);
      std::size_t used = 0;
      for (const auto& sg : batch) {
        if (!sg.used) continue;
        if (!std::isfinite(sg.loss)) throw NumericError("train: non-finite loss in epoch " + std::to_string(epoch));
        for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += sg.grad[i];
        losses.push_back(sg.loss);
        ++used;
      }
      if (used == 0) continue;
      for (double& g : grad) g /= static_cast<double>(used);

      auto params = model.flat_params();
      adam_step(params, grad, model.optimizer(), cfg.learning_rate);
      for (double p : params) {
        if (!std::isfinite(p)) throw NumericError("train: non-finite parameter after update");
      }
      model.set_flat_params(params);
    }

    const double mean = losses.empty() ? 0.0 : pairwise_sum(losses) / static_cast<double>(losses.size());
    result.epoch_loss.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  return result;
}

std::vector<std::uint8_t> upsample_mask(std::span<const std::uint8_t> lr_valid, int width,
                                        int height, int r) {
  if (lr_valid.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw ArgumentError("upsample_mask: mask size does not match dimensions");
  }
  const int hw = width * r;
  std::vector<std::uint8_t> out(static_cast<std::size_t>(hw) * static_cast<std::size_t>(height * r));
  for (int y = 0; y < height * r; ++y) {
    for (int x = 0; x < hw; ++x) {
      out[static_cast<std::size_t>(y) * static_cast<std::size_t>(hw) + static_cast<std::size_t>(x)] =
          lr_valid[static_cast<std::size_t>(y / r) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x / r)];
    }
  }
  return out;
}

Prediction decode_prediction(const Tensor& output, HeadMode head, const SrInput& in,
                             std::span<const std::uint8_t> valid) {
  const int h = output.dim(1);
  const int w = output.dim(2);
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (valid.size() != n) throw ArgumentError("decode_prediction: mask size does not match output");
  if (!output.all_finite()) throw NumericError("decode_prediction: network output is not finite");

  Prediction pred;
  if (head == HeadMode::Xyz) {
    if (output.dim(0) != 3) throw ArgumentError("decode_prediction: XYZ head needs 3 channels");
    pred.pncc = PnccImage(w, h);
    for (std::size_t i = 0; i < output.size(); ++i) pred.pncc.channels[i] = std::clamp(output[i], 0.0, 1.0);
    pred.pncc.valid.assign(valid.begin(), valid.end());
    pred.pncc.norm = in.norm;
    pred.depth = decode_depth(pred.pncc);
    pred.cloud = decode_pointcloud(pred.pncc);
    return pred;
  }

  if (output.dim(0) != 1) throw ArgumentError("decode_prediction: Z head needs 1 channel");
  pred.depth = DepthMap(w, h);
  for (std::size_t i = 0; i < n; ++i) {
    if (!valid[i]) continue;
    pred.depth.depth[i] = in.norm.denormalize(2, std::clamp(output[i], 0.0, 1.0));
    pred.depth.valid[i] = 1;
  }
  pred.cloud = backproject(pred.depth, in.hr_intrinsics);
  if (pred.depth.valid_count() > 0) {
    pred.pncc = encode(pred.depth, in.hr_intrinsics, in.norm.s);
  } else {
    pred.pncc = PnccImage(w, h);
    pred.pncc.norm = in.norm;
  }
  return pred;
}

Prediction predict(const SrModel& model, const PnccImage& lr, const Intrinsics& hr_intrinsics) {
  const ModelConfig& cfg = model.config();
  if (hr_intrinsics.width != lr.width * cfg.scale || hr_intrinsics.height != lr.height * cfg.scale) {
    throw ArgumentError("predict: HR intrinsics must describe the input size times the model scale");
  }
  const SrInput in = make_input(lr, cfg.input, hr_intrinsics);
  const Tensor out = forward(model, in);
  return decode_prediction(out, cfg.head,
                           in, upsample_mask(lr.valid, lr.width, lr.height, cfg.scale));
}

Prediction bicubic_baseline(const PnccImage& lr, const Intrinsics& hr_intrinsics, int scale) {
  ModelConfig cfg;
  cfg.head = HeadMode::Z;
  cfg.input = InputMode::Pncc;
  cfg.scale = scale;
  if (hr_intrinsics.width != lr.width * scale || hr_intrinsics.height != lr.height * scale) {
    throw ArgumentError("bicubic_baseline: HR intrinsics must describe the input size times the scale");
  }
  const SrInput in = make_input(lr, InputMode::Pncc, hr_intrinsics);
  return decode_prediction(skip_path(cfg, in), HeadMode::Z, in,
                           upsample_mask(lr.valid, lr.width, lr.height, scale));
}

}  // namespace pnsr
