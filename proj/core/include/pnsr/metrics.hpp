#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pnsr/geometry.hpp"

namespace pnsr {

/// Sum by recursive halving; the tree shape depends only on the length.
double pairwise_sum(std::span<const double> values) noexcept;

/// Root-mean-square depth error in centimetres over gt.valid AND pred.valid.
/// Throws EmptyInputError when the evaluation mask is empty.
double rmse_masked(const DepthMap& pred, const DepthMap& gt);

struct ChamferOptions {
  /// Average squared distances instead of Euclidean distances.
  bool squared = false;
  std::size_t leaf_size = 16;
};

/// 0.5 * (mean_a min_b |p - q| + mean_b min_a |q - p|) via k-d trees.
double chamfer(const PointCloud& a, const PointCloud& b, const ChamferOptions& opts = {});

/// One direction only: mean over `from` of the distance to the nearest point of `to`.
double chamfer_directed(const PointCloud& from, const PointCloud& to, const ChamferOptions& opts = {});

/// Same quantity by exhaustive search. Agrees with chamfer() bit for bit.
double chamfer_brute_force(const PointCloud& a, const PointCloud& b,
                           const ChamferOptions& opts = {});

struct TimingStats {
  std::vector<double> samples_s;
  double median_s = 0.0;
  double mean_s = 0.0;
  double stddev_s = 0.0;
  /// stddev / mean, 0 when the mean is 0.
  double cv = 0.0;
};

/// Wall-clock timing of `run`: n_warmup discarded calls then n_reps timed calls.
TimingStats bench(const std::function<void()>& run, int n_warmup, int n_reps);

/// One evaluated frame, or the aggregate over frames.
struct EvalReport {
  double rmse_cm = 0.0;
  double chamfer = 0.0;
  double time_total_s = 0.0;
  double time_per_frame_s = 0.0;
  long long param_count = 0;
  int n_frames = 0;

  void validate() const;
};

/// Aggregate: mean RMSE, median Chamfer, summed time.
EvalReport aggregate(std::span<const EvalReport> frames);

/// JSON lines: one object per frame followed by one aggregate object.
/// Field names: rmse_cm, chamfer, time_s, params, frames.
std::string eval_report_jsonl(std::span<const EvalReport> frames, const EvalReport& total);

}  // namespace pnsr
