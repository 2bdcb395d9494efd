#include <benchmark/benchmark.h>

#include <featsig/rng.hpp>
#include <featsig/stats.hpp>

#include <vector>

namespace {

std::vector<double> random_diffs(std::size_t n, std::uint64_t seed) {
    featsig::Rng rng(seed);
    std::vector<double> diffs(n);
    for (double& d : diffs) d = rng.normal();
    return diffs;
}

void BM_WilcoxonExact(benchmark::State& state) {
    const auto diffs = random_diffs(static_cast<std::size_t>(state.range(0)), 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            featsig::wilcoxon_signed_rank(diffs, featsig::Tail::greater));
    }
}
BENCHMARK(BM_WilcoxonExact)->Arg(10)->Arg(20)->Arg(25);

void BM_WilcoxonApprox(benchmark::State& state) {
    const auto diffs = random_diffs(static_cast<std::size_t>(state.range(0)), 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            featsig::wilcoxon_signed_rank(diffs, featsig::Tail::greater));
    }
}
BENCHMARK(BM_WilcoxonApprox)->Arg(100)->Arg(1000)->Arg(10000);

void BM_BenjaminiHochberg(benchmark::State& state) {
    featsig::Rng rng(3);
    std::vector<double> ps(static_cast<std::size_t>(state.range(0)));
    for (double& p : ps) p = rng.uniform01();
    for (auto _ : state) {
        benchmark::DoNotOptimize(featsig::benjamini_hochberg(ps, 0.05));
    }
}
BENCHMARK(BM_BenjaminiHochberg)->Arg(10)->Arg(1000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
