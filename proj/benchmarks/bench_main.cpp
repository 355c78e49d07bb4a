#include <benchmark/benchmark.h>

#include <random>

#include "iris3d/curvature.hpp"
#include "iris3d/delaunay.hpp"
#include "iris3d/dwt.hpp"
#include "iris3d/nn.hpp"
#include "iris3d/phantom.hpp"
#include "iris3d/reconstruct.hpp"

using namespace iris3d;

namespace {

nn::Tensor random_tensor(const nn::Shape& shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  nn::Tensor t(shape);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = u(rng);
  return t;
}

recon::CoarseMesh phantom_mesh() {
  phantom::PhantomParams p;
  p.bow = 20;
  p.frill_amplitude = 3;
  const recon::ScanGeometry geom;
  const auto vol = phantom::phantom_slices(p, geom);
  return recon::coarse_mesh(recon::slices_to_cloud(vol.boundaries, geom), 64);
}

void BM_Conv3x3(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  const auto x = random_tensor({c, 64, 64}, 1);
  const auto w = random_tensor({c, c, 3, 3}, 2);
  const auto b = random_tensor({c}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(nn::conv2d(x, w, b, 1, 1));
}
BENCHMARK(BM_Conv3x3)->Arg(8)->Arg(16);

void BM_HaarForwardInverse(benchmark::State& state) {
  const auto x = random_tensor({1, 64, 64}, 4);
  for (auto _ : state) benchmark::DoNotOptimize(dwt::dwt_inverse(dwt::dwt_forward(x)));
}
BENCHMARK(BM_HaarForwardInverse);

void BM_PoissonResample(benchmark::State& state) {
  const auto cm = phantom_mesh();
  const std::vector<double> curvature(cm.mesh.vertices.size(), 0.0);
  recon::SamplingParams sp;
  for (auto _ : state) benchmark::DoNotOptimize(recon::poisson_disk_resample(cm.mesh, curvature, sp));
}
BENCHMARK(BM_PoissonResample)->Unit(benchmark::kMillisecond);

void BM_Delaunay(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  std::vector<Vec2> pts(static_cast<std::size_t>(state.range(0)));
  for (auto& p : pts) p = {u(rng), u(rng)};
  for (auto _ : state) benchmark::DoNotOptimize(delaunay_2d(pts));
}
BENCHMARK(BM_Delaunay)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

void BM_CurvatureField(benchmark::State& state) {
  const auto cm = phantom_mesh();
  for (auto _ : state) benchmark::DoNotOptimize(curv::curvature_field(cm.mesh));
}
BENCHMARK(BM_CurvatureField)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
