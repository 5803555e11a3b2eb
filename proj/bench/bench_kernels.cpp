#include <benchmark/benchmark.h>

#include "folti/complexity.hpp"
#include "folti/forge.hpp"
#include "folti/lqr.hpp"
#include "folti/toeplitz.hpp"

namespace {

using namespace folti;

BlockToeplitz make_operator(int block, int blocks) {
  Rng rng = make_stream(1, 0);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  auto draw = [&] { return Mat(Mat::NullaryExpr(block, block, [&] { return d(rng); })); };
  MatSeq col, row;
  for (int k = 0; k < blocks; ++k) col.push_back(draw());
  row.push_back(col[0]);
  for (int k = 1; k < blocks; ++k) row.push_back(draw());
  return {col, row};
}

void BM_MatvecSerial(benchmark::State& state) {
  const BlockToeplitz op = make_operator(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const Vec v = Vec::Ones(op.dim());
  for (auto _ : state) benchmark::DoNotOptimize(matvec_serial(op, v));
}
BENCHMARK(BM_MatvecSerial)->Args({4, 32})->Args({4, 256})->Args({8, 512});

void BM_MatvecParallel(benchmark::State& state) {
  const BlockToeplitz op = make_operator(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const Vec v = Vec::Ones(op.dim());
  for (auto _ : state) benchmark::DoNotOptimize(matvec(op, v));
}
BENCHMARK(BM_MatvecParallel)->Args({4, 32})->Args({4, 256})->Args({8, 512});

// A_0 = A - diag(alpha) at spectral radius 0.9, so long horizons stay well conditioned.
BoundInputs bench_inputs() {
  GenSpec g;
  g.alpha_mode = AlphaMode::kFixed;
  g.alpha_fixed = Vec::Constant(2, 0.5);
  Rng rng = make_stream(3, 0);
  const FoltiModel drawn = random_model(g, rng);
  Mat a = drawn.a() * (0.9 / 0.95);
  a.diagonal() += g.alpha_fixed;
  const FoltiModel model(a, drawn.b(), drawn.alpha());
  return {model, random_cost(2, 2, rng), Vec::Ones(2), 10, 0.1, 20, 1};
}

// Replicate loop of the sample-complexity experiment; the argument is the worker count.
void BM_MonteCarloGap(benchmark::State& state) {
  const BoundInputs in = bench_inputs();
  for (auto _ : state) {
    benchmark::DoNotOptimize(monte_carlo_gap(in, {10, 100}, 200, 1, static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_MonteCarloGap)->Arg(1)->Arg(default_workers())->Unit(benchmark::kMillisecond);

void BM_Generate(benchmark::State& state) {
  GenSpec spec;
  spec.horizon = 64;
  spec.n_trajectories = 100;
  spec.noise_scale = 0.01;
  for (auto _ : state) benchmark::DoNotOptimize(generate(spec, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_Generate)->Arg(1)->Arg(default_workers())->Unit(benchmark::kMillisecond);

void BM_ControlSolvers(benchmark::State& state) {
  const BoundInputs in = bench_inputs();
  const auto method = static_cast<ControlMethod>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_control(in.model, in.cost, in.x0, static_cast<int>(state.range(0)), method));
  }
}
BENCHMARK(BM_ControlSolvers)
    ->Args({32, static_cast<int>(ControlMethod::kLeastSquares)})
    ->Args({32, static_cast<int>(ControlMethod::kLagrange)})
    ->Args({128, static_cast<int>(ControlMethod::kLeastSquares)})
    ->Args({128, static_cast<int>(ControlMethod::kLagrange)});

}  // namespace

BENCHMARK_MAIN();
