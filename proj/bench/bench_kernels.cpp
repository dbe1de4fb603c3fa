// Serial reference vs OpenMP kernels.
//   ./bench_kernels --benchmark_filter=Product
// OMP_NUM_THREADS controls the parallel variants.

#include <benchmark/benchmark.h>

#include <vector>

#include "gwr/exact_reduced.hpp"
#include "gwr/kernels.hpp"
#include "gwr/offspring_law.hpp"
#include "gwr/series.hpp"
#include "gwr/simulator.hpp"

namespace {

std::vector<double> positive_law(int K) {
  const auto law = gwr::OffspringLaw::make_builtin(gwr::Family::TernaryUniform);
  return gwr::conditioned_positive_pmf(law, 50, K).coeffs;
}

void BM_ProductSerial(benchmark::State& state) {
  const auto a = positive_law(static_cast<int>(state.range(0)));
  std::vector<double> out(a.size());
  for (auto _ : state) {
    gwr::kernels::truncated_product_serial(a, a, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetComplexityN(state.range(0));
}

void BM_ProductParallel(benchmark::State& state) {
  const auto a = positive_law(static_cast<int>(state.range(0)));
  std::vector<double> out(a.size());
  for (auto _ : state) {
    gwr::kernels::truncated_product(a, a, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetComplexityN(state.range(0));
}

BENCHMARK(BM_ProductSerial)->RangeMultiplier(4)->Range(64, 16384)->Complexity();
BENCHMARK(BM_ProductParallel)->RangeMultiplier(4)->Range(64, 16384)->Complexity()->UseRealTime();

void BM_PmfZn(benchmark::State& state) {
  const auto law = gwr::OffspringLaw::make_builtin(gwr::Family::Poisson);
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(gwr::pmf_Zn(law, n, n));
}
BENCHMARK(BM_PmfZn)->Arg(250)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_BatchSerial(benchmark::State& state) {
  const auto law = gwr::OffspringLaw::make_builtin(gwr::Family::TernaryUniform);
  for (auto _ : state) {
    auto batch = gwr::run_conditioned_batch_serial(law, 100, 100, {50}, 1'000'000, state.range(0), 7);
    benchmark::DoNotOptimize(batch.accepted);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_BatchParallel(benchmark::State& state) {
  const auto law = gwr::OffspringLaw::make_builtin(gwr::Family::TernaryUniform);
  for (auto _ : state) {
    auto batch = gwr::run_conditioned_batch(law, 100, 100, {50}, 1'000'000, state.range(0), 7);
    benchmark::DoNotOptimize(batch.accepted);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

BENCHMARK(BM_BatchSerial)->Arg(1 << 16)->Arg(1 << 18)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchParallel)->Arg(1 << 16)->Arg(1 << 18)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
