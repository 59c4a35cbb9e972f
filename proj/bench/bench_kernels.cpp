// Serial reference kernels against their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include "rdsgls/covariance.hpp"
#include "rdsgls/kernels.hpp"
#include "rdsgls/referral.hpp"

namespace {

rdsgls::ReferralTree bench_tree(int n) {
  return rdsgls::galton_watson_tree(rdsgls::offspring_fast_referral(), n, 7).tree;
}

void BM_DistancesSerial(benchmark::State& state) {
  const auto tree = bench_tree(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(rdsgls::all_pairs_distances_serial(tree));
}

void BM_DistancesParallel(benchmark::State& state) {
  const auto tree = bench_tree(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(rdsgls::all_pairs_distances(tree));
}

void BM_CovarianceSerial(benchmark::State& state) {
  const auto dist = rdsgls::all_pairs_distances(bench_tree(static_cast<int>(state.range(0))));
  const auto table = rdsgls::gamma_table(rdsgls::AutoCovariance::rank_two(1.0, 0.7), 200);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rdsgls::fill_covariance_serial(dist, table, 0.1));
  }
}

void BM_CovarianceParallel(benchmark::State& state) {
  const auto dist = rdsgls::all_pairs_distances(bench_tree(static_cast<int>(state.range(0))));
  const auto table = rdsgls::gamma_table(rdsgls::AutoCovariance::rank_two(1.0, 0.7), 200);
  for (auto _ : state) benchmark::DoNotOptimize(rdsgls::fill_covariance(dist, table, 0.1));
}

void BM_HistogramSerial(benchmark::State& state) {
  const auto dist = rdsgls::all_pairs_distances(bench_tree(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(rdsgls::distance_histogram_serial(dist));
}

void BM_HistogramParallel(benchmark::State& state) {
  const auto dist = rdsgls::all_pairs_distances(bench_tree(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(rdsgls::distance_histogram(dist));
}

}  // namespace

BENCHMARK(BM_DistancesSerial)->Arg(500)->Arg(2000);
BENCHMARK(BM_DistancesParallel)->Arg(500)->Arg(2000);
BENCHMARK(BM_CovarianceSerial)->Arg(500)->Arg(2000);
BENCHMARK(BM_CovarianceParallel)->Arg(500)->Arg(2000);
BENCHMARK(BM_HistogramSerial)->Arg(500)->Arg(2000);
BENCHMARK(BM_HistogramParallel)->Arg(500)->Arg(2000);

BENCHMARK_MAIN();
