// Serial reference versus OpenMP kernels, plus end-to-end plan() latency.

#include <benchmark/benchmark.h>

#include "sorts/kernels.hpp"
#include "sorts/scenario.hpp"

namespace {

using namespace sorts;

const AgentState kStart{3.0, 4.0, 0.3, 1.0, 0.04};

const std::vector<ReferencePath>& paths() {
    static const auto p = build_pattern_library(RunwayPose{}, 0.3, PatternGeometry{});
    return p;
}

void BM_RolloutSerial(benchmark::State& st) {
    for (auto _ : st)
        benchmark::DoNotOptimize(kernels::rollout_substeps_serial(kStart));
}
void BM_RolloutParallel(benchmark::State& st) {
    for (auto _ : st)
        benchmark::DoNotOptimize(kernels::rollout_substeps_parallel(kStart));
}

void BM_ReferenceSerial(benchmark::State& st) {
    for (auto _ : st)
        benchmark::DoNotOptimize(reference_scores(kStart, paths().front()));
}
void BM_ReferenceParallel(benchmark::State& st) {
    for (auto _ : st)
        benchmark::DoNotOptimize(kernels::reference_scores_parallel(kStart, paths().front()));
}

void BM_CostmapSerial(benchmark::State& st) {
    CostMapBuildParams p;
    p.samples_per_path = static_cast<std::size_t>(st.range(0));
    for (auto _ : st)
        benchmark::DoNotOptimize(build_costmap(paths(), p));
}
void BM_CostmapParallel(benchmark::State& st) {
    CostMapBuildParams p;
    p.samples_per_path = static_cast<std::size_t>(st.range(0));
    for (auto _ : st)
        benchmark::DoNotOptimize(kernels::build_costmap_parallel(paths(), p));
}

std::vector<EpisodeConfig> batch_configs(int episodes) {
    std::vector<EpisodeConfig> out;
    for (int i = 0; i < episodes; ++i) {
        EpisodeConfig c;
        c.n_agents = 2;
        c.seed = 900 + static_cast<std::uint64_t>(i);
        c.planners = {PlannerKind::Ablation};
        out.push_back(c);
    }
    return out;
}

const Environment& environment() {
    static const Environment env = [] {
        ExperimentSpec spec;
        spec.name = "bench";
        return make_environment(spec);
    }();
    return env;
}

void BM_BatchSerial(benchmark::State& st) {
    const auto cfgs = batch_configs(8);
    for (auto _ : st)
        benchmark::DoNotOptimize(run_batch_serial(environment(), cfgs));
}
void BM_BatchParallel(benchmark::State& st) {
    const auto cfgs = batch_configs(8);
    for (auto _ : st)
        benchmark::DoNotOptimize(run_batch(environment(), cfgs, kernels::max_threads()));
}

void BM_Plan(benchmark::State& st) {
    const Environment& env = environment();
    EpisodeConfig c;
    c.n_agents = 3;
    c.seed = 42;
    Episode ep(env, c);
    const WorldSnapshot world = ep.snapshot();
    PlanRequest req;
    req.world = &world;
    req.predictor = env.predictor.get();
    req.costmap = &env.costmap;
    req.config = env.planner;
    for (auto _ : st)
        benchmark::DoNotOptimize(plan(req));
}

}  // namespace

BENCHMARK(BM_RolloutSerial);
BENCHMARK(BM_RolloutParallel);
BENCHMARK(BM_ReferenceSerial);
BENCHMARK(BM_ReferenceParallel);
BENCHMARK(BM_CostmapSerial)->Arg(100)->Arg(1000);
BENCHMARK(BM_CostmapParallel)->Arg(100)->Arg(1000);
BENCHMARK(BM_BatchSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Plan)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
