#include "osgood/blowup.hpp"
#include "osgood/mild_solver.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace osgood;

struct Problem {
  std::shared_ptr<const SemigroupOperator> S;
  Vector a;
};

Problem make_problem(Index n) {
  std::mt19937_64 rng(42);
  auto g = std::make_shared<const WeightedGraph>(generators::random_connected(n, 0.1, rng));
  Vector a = Vector::Zero(static_cast<Eigen::Index>(n));
  a[0] = 1.5;
  return {std::make_shared<const SemigroupOperator>(g), a};
}

void BM_SearchCertificate(benchmark::State& state) {
  const auto p = make_problem(static_cast<Index>(state.range(0)));
  const OsgoodFunctional F(SourceTerm::power(1.0));
  SearchOptions options;
  options.threads = static_cast<unsigned>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(search_certificate(*p.S, F, p.a, 1e-3, 1e6, 1801, options));
  }
}
BENCHMARK(BM_SearchCertificate)->Args({20, 1})->Args({50, 1})->Args({50, 4});

void BM_VerifyCertificate(benchmark::State& state) {
  const auto p = make_problem(50);
  const OsgoodFunctional F(SourceTerm::power(1.0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(verify_certificate(*p.S, F, p.a, 10.0, {0, 1, 2}, state.range(0) != 0));
  }
}
BENCHMARK(BM_VerifyCertificate)->Arg(0)->Arg(1);

void BM_SolveScalar(benchmark::State& state) {
  const SemigroupOperator S(std::make_shared<const WeightedGraph>(generators::edgeless(1)));
  const auto f = SourceTerm::power(1.0);
  StepControls c;
  c.rtol = std::pow(10.0, -static_cast<double>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve(S, f, Vector::Constant(1, 2.0), 1.0, c));
  }
}
BENCHMARK(BM_SolveScalar)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_SolveGraph(benchmark::State& state) {
  const auto p = make_problem(static_cast<Index>(state.range(0)));
  const auto f = SourceTerm::power(1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve(*p.S, f, p.a, 1e3));
  }
}
BENCHMARK(BM_SolveGraph)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_Diagnostics(benchmark::State& state) {
  const auto p = make_problem(30);
  const auto f = SourceTerm::power(1.0);
  const auto trace = solve(*p.S, f, p.a, 1e3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(diagnostics(trace, *p.S, f, 0.9 * trace.t_emp, {0}));
  }
}
BENCHMARK(BM_Diagnostics)->Unit(benchmark::kMillisecond);

void BM_OsgoodInverse(benchmark::State& state) {
  const OsgoodFunctional F(state.range(0) == 0 ? SourceTerm::exp_minus_one()
                                               : SourceTerm::tabulated({0, 1, 2, 4, 8}, {0, 1, 4, 16, 64}));
  double y = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(F.inverse(y));
    y = y < 10.0 ? y * 1.01 : 0.5;
  }
}
BENCHMARK(BM_OsgoodInverse)->Arg(0)->Arg(1);

}  // namespace
