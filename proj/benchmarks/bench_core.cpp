#include <benchmark/benchmark.h>

#include "spmtc/driver.hpp"
#include "spmtc/io.hpp"
#include "spmtc/linalg.hpp"
#include "spmtc/metrics.hpp"
#include "spmtc/rng.hpp"
#include "spmtc/self_paced.hpp"
#include "spmtc/updates.hpp"

namespace {

using namespace spmtc;

Matrix random_symmetric(int n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix g(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) g(i, j) = rng.normal();
  }
  return (g + g.transpose()) / 2.0;
}

SynthSpec bench_spec(int d, int n) {
  SynthSpec spec;
  spec.m = 2;
  spec.d = d;
  spec.c = 3;
  spec.l_true = 2;
  spec.n = n;
  spec.separation = 8.0;
  spec.seed = 99;
  return spec;
}

void BM_EighAscending(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const Matrix s = random_symmetric(d, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(eigh_ascending(s, std::min(4, d)));
  }
}
BENCHMARK(BM_EighAscending)->Arg(20)->Arg(50)->Arg(100);

void BM_SolveRegularized(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  Rng rng(11);
  Matrix g(c, c);
  for (int j = 0; j < c; ++j) {
    for (int i = 0; i < c; ++i) g(i, j) = rng.normal();
  }
  const Matrix a = g * g.transpose();
  Matrix b(8, c);
  for (int j = 0; j < c; ++j) {
    for (int i = 0; i < 8; ++i) b(i, j) = rng.normal();
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_regularized(a, b, 1e-8));
  }
}
BENCHMARK(BM_SolveRegularized)->Arg(3)->Arg(16);

void BM_InnerSweep(benchmark::State& state) {
  const auto [problem, truth] =
      synth_multitask(bench_spec(20, static_cast<int>(state.range(0))));
  const ModelState initial = init_model_state(problem, 2, 3);
  const WeightState weights = WeightState::unit(problem);
  FitConfig config;
  config.subspace_dim = 2;
  config.inner_max_iters = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(inner_fit(problem, initial, weights, config));
  }
}
BENCHMARK(BM_InnerSweep)->Arg(120)->Arg(480);

void BM_SoftWeights(benchmark::State& state) {
  Rng rng(13);
  Vector losses(state.range(0));
  for (Eigen::Index i = 0; i < losses.size(); ++i) losses[i] = rng.uniform01() * 10.0;
  const double threshold = threshold_for_fraction(losses, 0.7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(soft_weights(losses, threshold));
  }
}
BENCHMARK(BM_SoftWeights)->Arg(1000)->Arg(100000);

void BM_KMeans(benchmark::State& state) {
  const auto [problem, truth] =
      synth_multitask(bench_spec(20, static_cast<int>(state.range(0))));
  for (auto _ : state) {
    benchmark::DoNotOptimize(kmeans_fit(problem.tasks[0], problem.c, 5));
  }
}
BENCHMARK(BM_KMeans)->Arg(120)->Arg(1000);

void BM_SpmtcFit(benchmark::State& state) {
  const auto [problem, truth] = synth_multitask(bench_spec(20, 120));
  FitConfig config;
  config.subspace_dim = 2;
  config.mode = state.range(0) == 0 ? WeightingMode::none : WeightingMode::soft;
  config.seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(spmtc_fit(problem, config));
  }
}
BENCHMARK(BM_SpmtcFit)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Metrics(benchmark::State& state) {
  Rng rng(17);
  const int n = static_cast<int>(state.range(0));
  std::vector<int> truth(static_cast<std::size_t>(n));
  std::vector<int> pred(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    truth[static_cast<std::size_t>(i)] = static_cast<int>(rng.index(8));
    pred[static_cast<std::size_t>(i)] = static_cast<int>(rng.index(8));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(clustering_accuracy(truth, pred));
    benchmark::DoNotOptimize(nmi(truth, pred));
  }
}
BENCHMARK(BM_Metrics)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
