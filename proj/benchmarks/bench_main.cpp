#include <benchmark/benchmark.h>

#include "multiexec/bounds.hpp"
#include "multiexec/comparison.hpp"
#include "multiexec/trajectory.hpp"

namespace {

using namespace multiexec;

// d assets with diagonal impact 1..d and a mildly correlated risk matrix.
ModelParams model(int d) {
  MatrixXd lambda = MatrixXd::Zero(d, d), sigma = MatrixXd::Constant(d, d, 0.2);
  for (int i = 0; i < d; ++i) {
    lambda(i, i) = 1.0 + i;
    sigma(i, i) = 1.0;
  }
  return make_constant_params(lambda, VectorXd::Ones(d), VectorXd::Ones(d), sigma, 1.0);
}

void BM_Rhs(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const ModelParams p = model(d);
  const BlockSym q = terminal_condition(64.0, p);
  for (auto _ : state) benchmark::DoNotOptimize(rhs(0.5, q, p));
}
BENCHMARK(BM_Rhs)->Arg(1)->Arg(2)->Arg(4)->Arg(8);

void BM_SolvePenalized(benchmark::State& state) {
  const ModelParams p = model(static_cast<int>(state.range(0)));
  const GridSpec grid{0.0, 1.0, static_cast<int>(state.range(1)), 8.0};
  for (auto _ : state) benchmark::DoNotOptimize(solve_penalized(p, 4.0 * n0(p), grid));
}
BENCHMARK(BM_SolvePenalized)
    ->ArgsProduct({{1, 2, 4}, {500, 2000, 8000}})
    ->Unit(benchmark::kMillisecond);

void BM_SolvePenalizedStiff(benchmark::State& state) {
  const ModelParams p = model(2);
  const GridSpec grid{0.0, 1.0, 2000, 8.0};
  const double n = n0(p) * static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_penalized(p, n, grid));
}
BENCHMARK(BM_SolvePenalizedStiff)->RangeMultiplier(16)->Range(2, 1 << 18)->Unit(benchmark::kMillisecond);

void BM_Ladder(benchmark::State& state) {
  const ModelParams p = model(2);
  const auto ladder = default_ladder(n0(p), static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_limit(p, 0.95, ladder, 0.0, GridSpec{}));
}
BENCHMARK(BM_Ladder)->Arg(4)->Arg(12)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_Simulate(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const ModelParams p = model(d);
  const auto sol = solve_penalized(p, 4.0 * n0(p), GridSpec{});
  const VectorXd x0 = VectorXd::Ones(d), y0 = VectorXd::Zero(d);
  for (auto _ : state) benchmark::DoNotOptimize(simulate(sol, 0.0, x0, y0));
}
BENCHMARK(BM_Simulate)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_EnvelopeCheck(benchmark::State& state) {
  const ModelParams p = model(2);
  const auto sol = solve_penalized(p, 64.0, GridSpec{});
  for (auto _ : state) benchmark::DoNotOptimize(check_envelope(sol, 1e-7));
}
BENCHMARK(BM_EnvelopeCheck)->Unit(benchmark::kMillisecond);

void BM_ExpIntegral(benchmark::State& state) {
  const ModelParams p = model(2);
  for (auto _ : state) benchmark::DoNotOptimize(exp_integral_bound(p, 1024.0, 0.0, 0.999));
}
BENCHMARK(BM_ExpIntegral)->Unit(benchmark::kMicrosecond);

void BM_ComparisonPair(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto grid = make_grid(GridSpec{0.0, 1.0, 200, 1.0});
  std::uint64_t seed = 0;
  for (auto _ : state) {
    const auto [a, b] = random_ordered_pair(seed++, d, 1.0);
    benchmark::DoNotOptimize(check_comparison(a, b, grid, 1e-8));
  }
}
BENCHMARK(BM_ComparisonPair)->DenseRange(1, 3)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
