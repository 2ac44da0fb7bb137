// Serial reference kernels against their OpenMP counterparts.
//
//   ./build/bench/bench_kernels --benchmark_filter=Repulsion

#include <algorithm>
#include <random>

#include <benchmark/benchmark.h>

#include "cellgraph/kernels.hpp"

using namespace cellgraph;

namespace {

struct Cloud {
    std::vector<Vec2> positions;
    std::vector<double> masses;
};

Cloud make_cloud(std::size_t n) {
    std::mt19937_64 rng(n);
    std::uniform_real_distribution<double> coord(0.0, 1000.0);
    std::uniform_int_distribution<int> degree(0, 10);
    Cloud c;
    for (std::size_t i = 0; i < n; ++i) {
        c.positions.push_back({coord(rng), coord(rng)});
        c.masses.push_back(1.0 + degree(rng));
    }
    return c;
}

// Sparse random graph with a spanning path so every pair is reachable.
LinkGraph make_graph(std::size_t n, std::size_t extra) {
    std::mt19937_64 rng(n * 31 + extra);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<std::pair<std::size_t, std::size_t>> links;
    for (std::size_t i = 1; i < n; ++i) links.push_back({i - 1, i});
    for (std::size_t k = 0; k < extra; ++k) {
        auto u = pick(rng), v = pick(rng);
        if (u == v) continue;
        links.push_back({std::min(u, v), std::max(u, v)});
    }
    std::sort(links.begin(), links.end());
    links.erase(std::unique(links.begin(), links.end()), links.end());
    return LinkGraph::from_links(n, std::move(links));
}

void RepulsionExact(benchmark::State& state) {
    const auto c = make_cloud(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(kernels::repulsion_exact(c.positions, c.masses, 5000.0));
    state.SetComplexityN(state.range(0));
}

void RepulsionBarnesHutSerial(benchmark::State& state) {
    const auto c = make_cloud(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(kernels::repulsion_barnes_hut_serial(c.positions, c.masses, 5000.0, 0.5));
    }
    state.SetComplexityN(state.range(0));
}

void RepulsionBarnesHutParallel(benchmark::State& state) {
    const auto c = make_cloud(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(kernels::repulsion_barnes_hut(c.positions, c.masses, 5000.0, 0.5));
    state.SetComplexityN(state.range(0));
}

void BrandesSerial(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto g = make_graph(n, 3 * n);
    for (auto _ : state) benchmark::DoNotOptimize(kernels::brandes_serial(g, state.range(1) != 0));
}

void BrandesParallel(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto g = make_graph(n, 3 * n);
    for (auto _ : state) benchmark::DoNotOptimize(kernels::brandes_parallel(g, state.range(1) != 0));
}

}  // namespace

BENCHMARK(RepulsionExact)->RangeMultiplier(4)->Range(256, 16384)->Unit(benchmark::kMillisecond);
BENCHMARK(RepulsionBarnesHutSerial)->RangeMultiplier(4)->Range(256, 16384)->Unit(benchmark::kMillisecond);
BENCHMARK(RepulsionBarnesHutParallel)->RangeMultiplier(4)->Range(256, 16384)->Unit(benchmark::kMillisecond);
BENCHMARK(BrandesSerial)->ArgsProduct({{200, 1000, 4000}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BrandesParallel)->ArgsProduct({{200, 1000, 4000}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
