#include "osgood/kernel_models.hpp"
#include "osgood/stable_density.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace osgood;

void BM_StableDensityExact(benchmark::State& state) {
  const StableDensity g(1, static_cast<double>(state.range(0)) / 10.0);
  double rho = 0.01;
  for (auto _ : state) {
    benchmark::DoNotOptimize(g(rho));
    rho = rho < 100.0 ? rho * 1.1 : 0.01;
  }
}
BENCHMARK(BM_StableDensityExact)->Arg(7)->Arg(10)->Arg(15);

void BM_StableProfile(benchmark::State& state) {
  const StableProfile p(1, 1.5);
  double rho = 0.01;
  for (auto _ : state) {
    benchmark::DoNotOptimize(p(rho));
    rho = rho < 100.0 ? rho * 1.1 : 0.01;
  }
}
BENCHMARK(BM_StableProfile);

void BM_KernelApply(benchmark::State& state) {
  const auto mesh = static_cast<Index>(state.range(0));
  const auto S = semigroup_from_kernel(KernelModel::gaussian(PointCloud::torus(1, mesh, 20.0)));
  const Vector phi = Vector::Ones(static_cast<Eigen::Index>(mesh));
  for (auto _ : state) {
    benchmark::DoNotOptimize(S->apply(0.5, phi));
  }
}
BENCHMARK(BM_KernelApply)->Arg(128)->Arg(512);

void BM_ValidateAxioms(benchmark::State& state) {
  const auto k = KernelModel::gaussian(PointCloud::torus(1, 128, 20.0));
  const std::vector<double> grid{0.01, 0.03, 0.1, 0.3, 1.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(validate_axioms(k, grid, spread_samples(128, 8)));
  }
}
BENCHMARK(BM_ValidateAxioms)->Unit(benchmark::kMillisecond);

}  // namespace
