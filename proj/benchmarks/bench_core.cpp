#include <benchmark/benchmark.h>

#include "pnsr/layers.hpp"
#include "pnsr/metrics.hpp"
#include "pnsr/pncc.hpp"
#include "pnsr/random.hpp"
#include "pnsr/resample.hpp"
#include "pnsr/sr_model.hpp"
#include "pnsr/synthdata.hpp"

namespace {

using namespace pnsr;

DatasetItem scene(int width, int height) {
  DatasetOptions opts;
  opts.width = width;
  opts.height = height;
  return build_dataset(1, 4, 17, opts).front();
}

void BM_BicubicUpsample(benchmark::State& state) {
  const int r = static_cast<int>(state.range(0));
  Rng rng(1);
  Image img(1, 32, 24);
  for (double& v : img.data) v = rng.uniform();
  for (auto _ : state) benchmark::DoNotOptimize(bicubic_resize_to(img, 32 * r, 24 * r));
  state.SetItemsProcessed(state.iterations() * 32 * 24 * r * r);
}
BENCHMARK(BM_BicubicUpsample)->Arg(4)->Arg(8)->Arg(16);

void BM_Conv2dForward(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  Rng rng(2);
  Tensor x({c, 32, 24});
  Tensor w({c, c, 3, 3});
  Tensor b({c});
  for (double& v : x.data()) v = rng.uniform(-1, 1);
  for (double& v : w.data()) v = rng.uniform(-1, 1);
  for (auto _ : state) benchmark::DoNotOptimize(conv2d_forward(x, w, b));
  state.SetItemsProcessed(state.iterations() * 32 * 24 * c * c * 9);
}
BENCHMARK(BM_Conv2dForward)->Arg(8)->Arg(32);

void BM_EncodePncc(benchmark::State& state) {
  const DatasetItem item = scene(128, 96);
  for (auto _ : state) benchmark::DoNotOptimize(encode(item.hr_depth, item.hr_intrinsics));
}
BENCHMARK(BM_EncodePncc);

void BM_Chamfer(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  PointCloud a, b;
  for (std::size_t i = 0; i < n; ++i) {
    a.points.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(1, 3)});
    b.points.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(1, 3)});
  }
  for (auto _ : state) benchmark::DoNotOptimize(chamfer(a, b));
}
BENCHMARK(BM_Chamfer)->Arg(1000)->Arg(12288);

void BM_ModelPredict(benchmark::State& state) {
  const DatasetItem item = scene(128, 96);
  const SrModel model(ModelConfig{}, 0);
  for (auto _ : state) benchmark::DoNotOptimize(predict(model, item.lr, item.hr_intrinsics));
  state.counters["params"] = static_cast<double>(model.param_count());
}
BENCHMARK(BM_ModelPredict)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
