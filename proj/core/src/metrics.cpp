#include "pnsr/metrics.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <nlohmann/json.hpp>

#include "pnsr/error.hpp"
#include "pnsr/kdtree.hpp"

namespace pnsr {

double pairwise_sum(std::span<const double> values) noexcept {
  if (values.size() <= 8) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double rmse_masked(const DepthMap& pred, const DepthMap& gt) {
  if (pred.width != gt.width || pred.height != gt.height) {
    throw ArgumentError("rmse_masked: prediction and ground truth differ in resolution");
  }
  std::vector<double> sq;
  for (std::size_t i = 0; i < gt.pixel_count(); ++i) {
    if (!gt.valid[i] || !pred.valid[i]) continue;
    const double e = pred.depth[i] - gt.depth[i];
    sq.push_back(e * e);
  }
  if (sq.empty()) throw EmptyInputError("rmse_masked: evaluation mask is empty");
  return std::sqrt(pairwise_sum(sq) / static_cast<double>(sq.size())) * 100.0;
}

namespace {

using Point = std::array<double, 3>;

std::vector<Point> as_arrays(const PointCloud& pc) {
  std::vector<Point> out;
  out.reserve(pc.size());
  for (const auto& p : pc.points) out.push_back({p.x, p.y, p.z});
  return out;
}

void require_nonempty(const PointCloud& a, const PointCloud& b) {
  if (a.empty() || b.empty()) throw EmptyInputError("chamfer: point cloud is empty");
}

double finish(std::vector<double>& dist2, const ChamferOptions& opts) {
  if (!opts.squared) {
    for (double& d : dist2) d = std::sqrt(d);
  }
  return pairwise_sum(dist2) / static_cast<double>(dist2.size());
}

double directed_tree(const std::vector<Point>& from, const std::vector<Point>& to,
                     const ChamferOptions& opts) {
  const KdTree<double, 3> tree(to, opts.leaf_size);
  std::vector<double> d2(from.size());
  for (std::size_t i = 0; i < from.size(); ++i) d2[i] = tree.nearest(from[i]).dist2;
  return finish(d2, opts);
}

double directed_brute(const std::vector<Point>& from, const std::vector<Point>& to,
                      const ChamferOptions& opts) {
  std::vector<double> d2(from.size());
  for (std::size_t i = 0; i < from.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : to) best = std::min(best, squared_distance(from[i], q));
    d2[i] = best;
  }
  return finish(d2, opts);
}

}  // namespace

double chamfer(const PointCloud& a, const PointCloud& b, const ChamferOptions& opts) {
  require_nonempty(a, b);
  const auto pa = as_arrays(a);
  const auto pb = as_arrays(b);
  const double ab = directed_tree(pa, pb, opts);
  const double ba = directed_tree(pb, pa, opts);
  // Symmetric in (a, b): addition commutes exactly.
  return 0.5 * (ab + ba);
}

double chamfer_directed(const PointCloud& from, const PointCloud& to, const ChamferOptions& opts) {
  require_nonempty(from, to);
  return directed_tree(as_arrays(from), as_arrays(to), opts);
}

double chamfer_brute_force(const PointCloud& a, const PointCloud& b, const ChamferOptions& opts) {
  require_nonempty(a, b);
  const auto pa = as_arrays(a);
  const auto pb = as_arrays(b);
  return 0.5 * (directed_brute(pa, pb, opts) + directed_brute(pb, pa, opts));
}

TimingStats bench(const std::function<void()>& run, int n_warmup, int n_reps) {
  if (n_reps < 1) throw ArgumentError("bench: n_reps must be at least 1");
  for (int i = 0; i < n_warmup; ++i) run();

  TimingStats stats;
  stats.samples_s.reserve(static_cast<std::size_t>(n_reps));
  for (int i = 0; i < n_reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    run();
    const auto t1 = std::chrono::steady_clock::now();
    stats.samples_s.push_back(std::chrono::duration<double>(t1 - t0).count());
  }

  auto sorted = stats.samples_s;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  stats.median_s = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  stats.mean_s = pairwise_sum(stats.samples_s) / static_cast<double>(n);
  double var = 0.0;
  for (double s : stats.samples_s) var += (s - stats.mean_s) * (s - stats.mean_s);
  stats.stddev_s = n > 1 ? std::sqrt(var / static_cast<double>(n - 1)) : 0.0;
  stats.cv = stats.mean_s > 0.0 ? stats.stddev_s / stats.mean_s : 0.0;
  return stats;
}

void EvalReport::validate() const {
  for (double v : {rmse_cm, chamfer, time_total_s, time_per_frame_s}) {
    if (!std::isfinite(v) || v < 0.0) throw NumericError("eval report: non-finite or negative value");
  }
  if (param_count < 0 || n_frames < 0) throw NumericError("eval report: negative count");
}

EvalReport aggregate(std::span<const EvalReport> frames) {
  if (frames.empty()) throw EmptyInputError("aggregate: no frames");
  EvalReport total;
  std::vector<double> rmse;
  std::vector<double> cham;
  std::vector<double> time;
  for (const auto& f : frames) {
    rmse.push_back(f.rmse_cm);
    cham.push_back(f.chamfer);
    time.push_back(f.time_total_s);
  }
  const double n = static_cast<double>(frames.size());
  total.rmse_cm = pairwise_sum(rmse) / n;
  std::sort(cham.begin(), cham.end());
  total.chamfer = cham.size() % 2 ? cham[cham.size() / 2]
                                  : 0.5 * (cham[cham.size() / 2 - 1] + cham[cham.size() / 2]);
  total.time_total_s = pairwise_sum(time);
  total.time_per_frame_s = total.time_total_s / n;
  total.param_count = frames.front().param_count;
  total.n_frames = static_cast<int>(frames.size());
  return total;
}

std::string eval_report_jsonl(std::span<const EvalReport> frames, const EvalReport& total) {
  std::string out;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    nlohmann::ordered_json j;
    j["frame"] = i;
    j["rmse_cm"] = f.rmse_cm;
    j["chamfer"] = f.chamfer;
    j["time_s"] = f.time_per_frame_s;
    j["params"] = f.param_count;
    j["frames"] = 1;
    out += j.dump() + "\n";
  }
  nlohmann::ordered_json j;
  j["aggregate"] = true;
  j["rmse_cm"] = total.rmse_cm;
  j["chamfer"] = total.chamfer;
  j["time_s"] = total.time_per_frame_s;
  j["time_total_s"] = total.time_total_s;
  j["params"] = total.param_count;
  j["frames"] = total.n_frames;
  out += j.dump() + "\n";
  return out;
}

}  // namespace pnsr
