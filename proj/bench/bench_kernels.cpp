// Microbenchmarks pitting the OpenMP kernels against the serial reference
// lane. Sizes are chosen so each pair runs in milliseconds; the interesting
// number is the ratio between the _omp and _serial variants at a given
// OMP_NUM_THREADS.

#include <cstdint>
#include <vector>

#include <benchmark/benchmark.h>

#include "specmap/kernels.hpp"
#include "specmap/matrix.hpp"
#include "specmap/rng.hpp"

namespace {

using specmap::Matrix;
namespace kernels = specmap::kernels;

Matrix cloud(std::size_t n, std::size_t d, std::uint64_t seed) {
    specmap::Rng rng(seed);
    Matrix x(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) x(i, j) = rng.gaussian();
    return x;
}

// ring plus seeded chords, connected and sparse like a neighborhood graph
kernels::AdjacencyList chord_graph(std::size_t n, std::size_t chords, std::uint64_t seed) {
    kernels::AdjacencyList adj(n);
    auto link = [&](std::size_t a, std::size_t b, double w) {
        adj[a].push_back({static_cast<std::uint32_t>(b), w});
        adj[b].push_back({static_cast<std::uint32_t>(a), w});
    };
    for (std::size_t i = 0; i < n; ++i) link(i, (i + 1) % n, 1.0);
    specmap::Rng rng(seed);
    for (std::size_t c = 0; c < chords; ++c) {
        const std::size_t a = rng.uniform_index(n);
        const std::size_t b = rng.uniform_index(n);
        if (a != b) link(a, b, 1.0 + rng.uniform());
    }
    return adj;
}

std::vector<std::pair<std::size_t, std::size_t>> spans(std::size_t d, std::size_t count) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t r = 0; r < count; ++r)
        out.push_back({r * d / count, (r + 1) * d / count});
    return out;
}

void bm_pairwise_omp(benchmark::State& state) {
    const auto x = cloud(600, 64, 1);
    for (auto _ : state) benchmark::DoNotOptimize(kernels::pairwise_distances(x));
}

void bm_pairwise_serial(benchmark::State& state) {
    const auto x = cloud(600, 64, 1);
    for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::pairwise_distances(x));
}

void bm_poly_kernel_omp(benchmark::State& state) {
    const auto x = cloud(400, 32, 2);
    for (auto _ : state) benchmark::DoNotOptimize(kernels::poly_kernel_matrix(x, 3, 1.0));
}

void bm_poly_kernel_serial(benchmark::State& state) {
    const auto x = cloud(400, 32, 2);
    for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::poly_kernel_matrix(x, 3, 1.0));
}

void bm_region_totals_omp(benchmark::State& state) {
    const auto x = cloud(500, 2000, 3);
    const auto sp = spans(2000, 16);
    for (auto _ : state) benchmark::DoNotOptimize(kernels::region_totals(x, sp));
}

void bm_region_totals_serial(benchmark::State& state) {
    const auto x = cloud(500, 2000, 3);
    const auto sp = spans(2000, 16);
    for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::region_totals(x, sp));
}

void bm_assign_omp(benchmark::State& state) {
    const auto pts = cloud(20000, 8, 4);
    const auto cent = cloud(12, 8, 5);
    std::vector<int> assignment;
    std::vector<double> dist2;
    for (auto _ : state) {
        kernels::assign_clusters(pts, cent, assignment, dist2);
        benchmark::DoNotOptimize(assignment.data());
    }
}

void bm_assign_serial(benchmark::State& state) {
    const auto pts = cloud(20000, 8, 4);
    const auto cent = cloud(12, 8, 5);
    std::vector<int> assignment;
    std::vector<double> dist2;
    for (auto _ : state) {
        kernels::serial::assign_clusters(pts, cent, assignment, dist2);
        benchmark::DoNotOptimize(assignment.data());
    }
}

void bm_geodesic_omp(benchmark::State& state) {
    const auto adj = chord_graph(800, 4000, 6);
    for (auto _ : state) benchmark::DoNotOptimize(kernels::geodesic_all_pairs(adj));
}

void bm_geodesic_serial(benchmark::State& state) {
    const auto adj = chord_graph(800, 4000, 6);
    for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::geodesic_all_pairs(adj));
}

BENCHMARK(bm_pairwise_omp);
BENCHMARK(bm_pairwise_serial);
BENCHMARK(bm_poly_kernel_omp);
BENCHMARK(bm_poly_kernel_serial);
BENCHMARK(bm_region_totals_omp);
BENCHMARK(bm_region_totals_serial);
BENCHMARK(bm_assign_omp);
BENCHMARK(bm_assign_serial);
BENCHMARK(bm_geodesic_omp);
BENCHMARK(bm_geodesic_serial);

} // namespace

BENCHMARK_MAIN();
