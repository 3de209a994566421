// OpenMP kernels against their serial references, plus the analysis hot
// paths at the sizes a desk-scale run uses.
//
//   build/bench/bench_kernels [--benchmark_filter=Matmul]

#include <benchmark/benchmark.h>

#include <vector>

#include "groktopo/geometry.hpp"
#include "groktopo/kernels.hpp"
#include "groktopo/ph.hpp"
#include "groktopo/rng.hpp"

using namespace groktopo;

namespace {

std::vector<float> random_floats(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<float> v(n);
    for (auto& x : v) x = static_cast<float>(rng.normal());
    return v;
}

std::vector<double> random_points(std::size_t n, std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(n * d);
    for (auto& x : v) x = rng.uniform();
    return v;
}

template <bool Parallel>
void BM_Matmul(benchmark::State& state) {
    const auto m = static_cast<std::size_t>(state.range(0));
    const auto n = static_cast<std::size_t>(state.range(1));
    const auto k = static_cast<std::size_t>(state.range(2));
    const auto a = random_floats(m * k, 1);
    const auto b = random_floats(k * n, 2);
    std::vector<float> c(m * n);
    for (auto _ : state) {
        if constexpr (Parallel) {
            kernels::matmul(a.data(), b.data(), c.data(), m, n, k);
        } else {
            kernels::serial::matmul(a.data(), b.data(), c.data(), m, n, k);
        }
        benchmark::DoNotOptimize(c.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * m * n * k));
    state.counters["threads"] = Parallel ? kernels::max_threads() : 1;
}

template <bool Parallel>
void BM_PairwiseDistances(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto d = static_cast<std::size_t>(state.range(1));
    const auto x = random_points(n, d, 3);
    std::vector<double> out(n * n);
    for (auto _ : state) {
        if constexpr (Parallel) {
            kernels::pairwise_distances(x, n, d, out);
        } else {
            kernels::serial::pairwise_distances(x, n, d, out);
        }
        benchmark::DoNotOptimize(out.data());
    }
    state.counters["threads"] = Parallel ? kernels::max_threads() : 1;
}

void BM_RipsDiagram(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const PointCloud cloud(n, 16, random_points(n, 16, 4));
    const auto d = distance_matrix(cloud);
    for (auto _ : state) benchmark::DoNotOptimize(rips_diagram(d));
}

void BM_PointwiseLid(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const PointCloud cloud(n, 64, random_points(n, 64, 5));
    for (auto _ : state) benchmark::DoNotOptimize(pointwise_lid(cloud));
}

}  // namespace

// Shapes: a desk MLP batch through the first hidden layer, and a square case.
BENCHMARK(BM_Matmul<false>)->Name("Matmul/serial")->Args({512, 512, 1024})->Args({256, 256, 256});
BENCHMARK(BM_Matmul<true>)->Name("Matmul/openmp")->Args({512, 512, 1024})->Args({256, 256, 256});
BENCHMARK(BM_PairwiseDistances<false>)->Name("PairwiseDistances/serial")->Args({400, 512})->Args({2000, 64});
BENCHMARK(BM_PairwiseDistances<true>)->Name("PairwiseDistances/openmp")->Args({400, 512})->Args({2000, 64});
BENCHMARK(BM_RipsDiagram)->Arg(97)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PointwiseLid)->Arg(2000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
