#include "osgood/semigroup.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace osgood;

std::shared_ptr<const WeightedGraph> random_graph(Index n) {
  std::mt19937_64 rng(n);
  return std::make_shared<const WeightedGraph>(generators::random_connected(n, 4.0 / static_cast<double>(n), rng));
}

void BM_DenseApply(benchmark::State& state) {
  const auto n = static_cast<Index>(state.range(0));
  const SemigroupOperator S(random_graph(n), ExpMethod::Dense);
  const Vector phi = Vector::Unit(static_cast<Eigen::Index>(n), 0);
  S.apply(1.0, phi);  // spectrum
  for (auto _ : state) {
    benchmark::DoNotOptimize(S.apply(1.0, phi));
  }
}
BENCHMARK(BM_DenseApply)->Arg(50)->Arg(200)->Arg(800);

void BM_KrylovApply(benchmark::State& state) {
  const auto n = static_cast<Index>(state.range(0));
  const SemigroupOperator S(random_graph(n), ExpMethod::Krylov);
  const Vector phi = Vector::Unit(static_cast<Eigen::Index>(n), 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(S.apply(1.0, phi));
  }
}
BENCHMARK(BM_KrylovApply)->Arg(200)->Arg(800)->Arg(4000);

void BM_PathHeatKernel(benchmark::State& state) {
  const SemigroupOperator S(std::make_shared<const WeightedGraph>(generators::path(4001)));
  const double t = static_cast<double>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(S.apply(t, Vector::Unit(4001, 2000)));
  }
}
BENCHMARK(BM_PathHeatKernel)->Arg(25)->Arg(100);

void BM_Spectrum(benchmark::State& state) {
  const auto g = random_graph(static_cast<Index>(state.range(0)));
  const Vector phi = Vector::Unit(state.range(0), 0);
  for (auto _ : state) {
    const SemigroupOperator S(g, ExpMethod::Dense);
    benchmark::DoNotOptimize(S.apply(1.0, phi));
  }
}
BENCHMARK(BM_Spectrum)->Arg(50)->Arg(200);

}  // namespace
