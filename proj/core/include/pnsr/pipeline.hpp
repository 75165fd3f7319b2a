#pragma once

#include <functional>
#include <span>
#include <vector>

#include "pnsr/metrics.hpp"
#include "pnsr/sr_model.hpp"
#include "pnsr/synthdata.hpp"

namespace pnsr {

/// Maps one dataset item to a decoded HR prediction.
using Predictor = std::function<Prediction(const DatasetItem&)>;

struct EvalOptions {
  /// When false every time field is reported as 0, making reports byte-stable.
  bool timing = true;
  ChamferOptions chamfer;
};

/// Per-frame reports. The timed region covers LR encoding, the predictor and
/// decoding; rendering and file I/O are excluded.
std::vector<EvalReport> evaluate(const Predictor& predictor, std::span<const DatasetItem> items,
                                 long long param_count, const EvalOptions& opts = {});

std::vector<EvalReport> evaluate_model(const SrModel& model, std::span<const DatasetItem> items,
                                       const EvalOptions& opts = {});
std::vector<EvalReport> evaluate_bicubic(std::span<const DatasetItem> items, int scale,
                                         const EvalOptions& opts = {});

struct AblationRow {
  HeadMode head = HeadMode::Z;
  InputMode input = InputMode::Pncc;
  long long param_count = 0;
  double final_loss = 0.0;
  EvalReport report;
};

/// Trains and evaluates the four {XYZ, Z} x {PNCC, DEPTH} variants with the
/// same seeds, in that order.
std::vector<AblationRow> run_ablation(std::span<const DatasetItem> train_items,
                                      std::span<const DatasetItem> test_items,
                                      const TrainConfig& base, const EvalOptions& opts = {});

}  // namespace pnsr
