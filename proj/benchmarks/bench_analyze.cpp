#include <benchmark/benchmark.h>

#include <featsig/featsig.hpp>

#include <cstdint>
#include <memory>

namespace {

using namespace featsig;

struct Workbench {
    GroundTruth truth;
    FeatureHierarchy hierarchy;
    Dataset data;
    std::shared_ptr<SyntheticModel> model;
};

Workbench make_workbench(std::size_t n_features, std::size_t m) {
    const std::uint64_t seed = 42;
    Workbench w{generate_ground_truth(n_features, n_features / 10, n_features / 20, seed),
                build_random_hierarchy(n_features, seed), {}, nullptr};
    w.data = generate_instances(w.truth, m, 0.5, mix_seed(seed, 1));
    w.model = make_synthetic_model(w.truth, 0.05, mix_seed(seed, 2));
    return w;
}

void BM_AnalyzeErasure(benchmark::State& state) {
    const auto w = make_workbench(static_cast<std::size_t>(state.range(0)),
                                  static_cast<std::size_t>(state.range(1)));
    AnalysisConfig config;
    config.perturbation = PerturbationSpec::erasure(0.0).with_seed(7);
    config.workers = static_cast<std::size_t>(state.range(2));
    for (auto _ : state) {
        benchmark::DoNotOptimize(analyze(*w.model, w.data, w.hierarchy, config));
    }
}
BENCHMARK(BM_AnalyzeErasure)
    ->Args({100, 1000, 1})
    ->Args({100, 1000, 4})
    ->Args({500, 2000, 1})
    ->Args({500, 2000, 4})
    ->Unit(benchmark::kMillisecond);

void BM_AnalyzePermutation(benchmark::State& state) {
    const auto w = make_workbench(64, 500);
    AnalysisConfig config;
    config.perturbation =
        PerturbationSpec::permutation(static_cast<std::size_t>(state.range(0)), 7);
    config.workers = 4;
    for (auto _ : state) {
        benchmark::DoNotOptimize(analyze(*w.model, w.data, w.hierarchy, config));
    }
}
BENCHMARK(BM_AnalyzePermutation)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_Interactions(benchmark::State& state) {
    const auto w = make_workbench(64, 1000);
    std::vector<std::size_t> leaf_ids;
    for (std::size_t f = 0; f < static_cast<std::size_t>(state.range(0)); ++f) {
        leaf_ids.push_back(*w.hierarchy.find("f" + std::to_string(f)));
    }
    const auto candidates = candidate_pairs(w.hierarchy, leaf_ids);
    const auto spec = PerturbationSpec::erasure(0.0).with_seed(9);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            analyze_interactions(*w.model, w.data, w.hierarchy, candidates, 0.05, spec, 4));
    }
}
BENCHMARK(BM_Interactions)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_ConstrainedCluster(benchmark::State& state) {
    Rng rng(11);
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    Matrix X(200, n);
    for (std::size_t r = 0; r < X.rows(); ++r) {
        for (std::size_t c = 0; c < n; ++c) X.at(r, c) = (rng.next() & 1u) ? 1.0 : 0.0;
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(constrained_cluster(X));
    }
}
BENCHMARK(BM_ConstrainedCluster)->Arg(64)->Arg(256)->Arg(547)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
