// Microbenchmarks for the hot paths: kernels, belief matrices, SP aggregation,
// baselines and posterior sampling.

#include <benchmark/benchmark.h>

#include "spvote/baselines.hpp"
#include "spvote/experiments.hpp"
#include "spvote/inference.hpp"
#include "spvote/rank_models.hpp"
#include "spvote/sp_engine.hpp"

using namespace spvote;

namespace {

ModelSpec cmm_spec(int m) { return ModelSpec::cmm(Ranking::identity(m), CmmParams{{0.2, 0.3, 0.5}, {0.1, 0.5, 0.9}}); }

ModelSpec cmpl_spec(int m) {
  std::vector<double> sharp(static_cast<std::size_t>(m));
  std::vector<double> flat(static_cast<std::size_t>(m));
  double a = 0.0;
  double b = 0.0;
  for (int j = 0; j < m; ++j) {
    a += sharp[static_cast<std::size_t>(j)] = m - j;
    b += flat[static_cast<std::size_t>(j)] = 2.0 * m - j;
  }
  for (auto& x : sharp) x /= a;
  for (auto& x : flat) x /= b;
  return ModelSpec::cmpl(Ranking::identity(m), CmplParams{{0.4, 0.6}, {sharp, flat}});
}

void BM_MallowsNormalizer(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  double phi = 0.3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mallows_normalizer(phi, m));
    phi = phi < 0.9 ? phi + 1e-6 : 0.3;
  }
}
BENCHMARK(BM_MallowsNormalizer)->Arg(5)->Arg(10)->Arg(20);

void BM_KernelMatrixCmm(benchmark::State& state) {
  const auto spec = cmm_spec(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(KernelMatrix(spec).size());
}
BENCHMARK(BM_KernelMatrixCmm)->DenseRange(3, 6);

void BM_KernelMatrixCmpl(benchmark::State& state) {
  const auto spec = cmpl_spec(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(KernelMatrix(spec).size());
}
BENCHMARK(BM_KernelMatrixCmpl)->DenseRange(3, 6);

void BM_BeliefModel(benchmark::State& state) {
  const auto spec = cmm_spec(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(BeliefModel(spec).modal_prediction(0));
}
BENCHMARK(BM_BeliefModel)->DenseRange(3, 5);

void BM_ExactVbar(benchmark::State& state) {
  const auto spec = cmm_spec(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(exact_vbar(spec));
}
BENCHMARK(BM_ExactVbar)->DenseRange(3, 5);

void BM_SampleCmpl(benchmark::State& state) {
  const auto spec = cmpl_spec(8);
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sample_model(spec, n, 1).rankings.size());
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_SampleCmpl)->Arg(1000)->Arg(100000);

void BM_Copeland(benchmark::State& state) {
  const auto votes = sample_model(cmm_spec(static_cast<int>(state.range(0))), 1000, 2).rankings;
  for (auto _ : state) benchmark::DoNotOptimize(copeland(votes));
}
BENCHMARK(BM_Copeland)->Arg(4)->Arg(10);

void BM_SpModal(benchmark::State& state) {
  const auto profile = simulate_profile(cmm_spec(static_cast<int>(state.range(0))), 500, 3);
  for (auto _ : state) benchmark::DoNotOptimize(sp_aggregate(profile).winner);
}
BENCHMARK(BM_SpModal)->DenseRange(3, 5);

std::vector<RankingPair> pairs(const ModelSpec& spec, std::size_t n) {
  const auto votes = sample_model(spec, n, 4);
  const auto predictions = sample_model(spec, n, 5);
  std::vector<RankingPair> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({votes.rankings[i], predictions.rankings[i]});
  return out;
}

McmcConfig short_run() {
  McmcConfig cfg;
  cfg.chains = 1;
  cfg.iterations = 500;
  cfg.warmup = 100;
  cfg.threads = 1;
  return cfg;
}

void BM_CmmInfer(benchmark::State& state) {
  const auto spec = ModelSpec::cmm(Ranking::identity(5), CmmParams{{0.3, 0.7}, {0.2, 0.8}});
  const auto data = to_distances(pairs(spec, 1000), spec.ground_truth());
  for (auto _ : state) benchmark::DoNotOptimize(cmm_infer(data, 5, 2, PriorSpec::cmm_default(2), short_run()).draws.size());
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * short_run().iterations);
}
BENCHMARK(BM_CmmInfer)->Unit(benchmark::kMillisecond);

void BM_CmplInfer(benchmark::State& state) {
  const auto spec = cmpl_spec(5);
  const auto data = pairs(spec, 1000);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cmpl_infer(data, spec.ground_truth(), 2, PriorSpec::cmpl_default(2, 5), short_run()).draws.size());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * short_run().iterations);
}
BENCHMARK(BM_CmplInfer)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
