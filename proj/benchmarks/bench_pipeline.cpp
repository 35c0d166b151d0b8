#include <benchmark/benchmark.h>

#include "cgm/point_cloud.hpp"
#include "cgm/projection.hpp"
#include "cgm/synthetic_scene.hpp"

namespace {

const cgm::SceneSample& scene() {
  static const cgm::SceneSample s = cgm::generate_figure(cgm::FigureParams{}, 7);
  return s;
}

void BM_GenerateFigure(benchmark::State& state) {
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cgm::generate_figure(cgm::FigureParams{}, ++seed));
  }
}
BENCHMARK(BM_GenerateFigure)->Unit(benchmark::kMillisecond);

void BM_Project(benchmark::State& state) {
  const cgm::CameraIntrinsics intr =
      cgm::kDefaultIntrinsics.scaled_to(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(cgm::project(scene().cloud, intr));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * scene().cloud.size()));
}
BENCHMARK(BM_Project)->Args({240, 180})->Args({120, 90});

void BM_ParsePcd(benchmark::State& state) {
  const std::string bytes = cgm::write_pcd(scene().cloud);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cgm::parse_pcd(bytes));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * bytes.size()));
}
BENCHMARK(BM_ParsePcd)->Unit(benchmark::kMillisecond);

void BM_DepthPgmRoundTrip(benchmark::State& state) {
  const cgm::DepthImage img = cgm::project(scene().cloud, cgm::kDefaultIntrinsics).image;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cgm::read_depth_pgm(cgm::write_depth_pgm(img)));
  }
}
BENCHMARK(BM_DepthPgmRoundTrip);

void BM_Letterbox(benchmark::State& state) {
  const cgm::DepthImage img = cgm::project(scene().cloud, cgm::kDefaultIntrinsics).image;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cgm::letterbox(img, 120, 90));
  }
}
BENCHMARK(BM_Letterbox);

}  // namespace
