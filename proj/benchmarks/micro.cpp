// Microbenchmarks for the hot paths: quantization, GLCM construction,
// multi-offset extraction, the full loss/gradient pass, and SSIM.

#include <benchmark/benchmark.h>

#include <vector>

#include "texloss/texloss.hpp"

namespace {

using namespace texloss;

Image make_image(int side, uint64_t seed) {
  Rng rng(seed);
  std::vector<double> px(static_cast<size_t>(side) * side);
  for (double& v : px) v = rng.uniform(-1.0, 1.0);
  return Image(side, side, std::move(px), Interval(-1.0, 1.0));
}

void BM_soft_assign(benchmark::State& state) {
  Image img = make_image(128, 1);
  BinGrid bins = BinGrid::uniform(static_cast<int>(state.range(0)), Interval(-1, 1), 0.5);
  for (auto _ : state) {
    SoftAssignment a = soft_assign(img, bins);
    benchmark::DoNotOptimize(a.weights.data());
  }
  state.SetItemsProcessed(state.iterations() * img.pixel_count());
}
BENCHMARK(BM_soft_assign)->Arg(8)->Arg(32)->Arg(128);

void BM_hard_glcm(benchmark::State& state) {
  Image img = make_image(static_cast<int>(state.range(0)), 2);
  BinGrid bins = BinGrid::uniform(32, Interval(-1, 1), 0.5);
  Offset off(1, 0);
  for (auto _ : state) {
    Glcm g = hard_glcm(img, off, bins);
    benchmark::DoNotOptimize(g.entries.data());
  }
  state.SetItemsProcessed(state.iterations() * img.pixel_count());
}
BENCHMARK(BM_hard_glcm)->Arg(64)->Arg(128)->Arg(256);

void BM_soft_glcm(benchmark::State& state) {
  Image img = make_image(static_cast<int>(state.range(0)), 3);
  BinGrid bins = BinGrid::uniform(32, Interval(-1, 1), 0.5);
  Offset off(1, 0);
  for (auto _ : state) {
    Glcm g = soft_glcm(img, off, bins);
    benchmark::DoNotOptimize(g.entries.data());
  }
  state.SetItemsProcessed(state.iterations() * img.pixel_count());
}
BENCHMARK(BM_soft_glcm)->Arg(64)->Arg(128);

void BM_extract(benchmark::State& state) {
  Image img = make_image(32, 4);
  BinGrid bins = BinGrid::uniform(8, Interval(-1, 1), 0.5);
  OffsetGrid grid = OffsetGrid::defaults();
  for (auto _ : state) {
    TextureRepr repr = extract(img, grid, bins, DescriptorKind::Contrast, GlcmMode::Soft);
    benchmark::DoNotOptimize(repr.values.data());
  }
}
BENCHMARK(BM_extract);

void BM_loss_and_grad(benchmark::State& state) {
  Image x = make_image(32, 5);
  Image ref = make_image(32, 6);
  BinGrid bins = BinGrid::uniform(8, Interval(-1, 1), 0.5);
  TextureRepr target =
      extract(ref, OffsetGrid::defaults(), bins, DescriptorKind::Contrast, GlcmMode::Soft);
  AggregationRule rule = AggregationRule::average();
  for (auto _ : state) {
    auto [l, g] = loss_and_grad_raw(x.data(), 32, 32, target, bins, rule);
    benchmark::DoNotOptimize(l);
    benchmark::DoNotOptimize(g.data());
  }
}
BENCHMARK(BM_loss_and_grad);

void BM_ssim(benchmark::State& state) {
  Image a = make_image(256, 7);
  Image b = make_image(256, 8);
  for (auto _ : state) {
    double v = ssim(a, b);
    benchmark::DoNotOptimize(v);
  }
  state.SetItemsProcessed(state.iterations() * a.pixel_count());
}
BENCHMARK(BM_ssim);

}  // namespace

BENCHMARK_MAIN();
