#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "mkvcyl/mkvcyl.hpp"

using namespace mkvcyl;

namespace {

EmpiricalMeasure cloud(std::size_t n, double shift, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    std::vector<double> pts(2 * n);
    for (auto& x : pts)
        x = shift + z(rng);
    return EmpiricalMeasure::uniform(2, std::move(pts));
}

void BM_BLDistance(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto a = cloud(n, 0.0, 1), b = cloud(n, 0.5, 2);
    for (auto _ : state)
        benchmark::DoNotOptimize(bl_distance(a, b));
}
BENCHMARK(BM_BLDistance)->RangeMultiplier(2)->Range(16, 256)->Unit(benchmark::kMillisecond);

void BM_W1Distance(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto a = cloud(n, 0.0, 1), b = cloud(n, 0.5, 2);
    for (auto _ : state)
        benchmark::DoNotOptimize(w1_distance(a, b));
}
BENCHMARK(BM_W1Distance)->RangeMultiplier(2)->Range(16, 256)->Unit(benchmark::kMillisecond);

void BM_FracIntegral(benchmark::State& state)
{
    const TimeLattice lat{1.0, static_cast<std::size_t>(state.range(0))};
    const auto f = LatticeFunction::sample(lat, [](double t) { return std::sin(3.0 * t); });
    frac_integral(f, 0.4);  // fill the matrix cache
    for (auto _ : state)
        benchmark::DoNotOptimize(frac_integral(f, 0.4));
}
BENCHMARK(BM_FracIntegral)->RangeMultiplier(4)->Range(64, 1024)->Unit(benchmark::kMicrosecond);

// Uncached: a fresh horizon every iteration forces a rebuild.
void BM_VolterraMatrixBuild(benchmark::State& state)
{
    const auto N = static_cast<std::size_t>(state.range(0));
    double T = 1.0;
    for (auto _ : state) {
        T += 1e-9;
        benchmark::DoNotOptimize(volterra_matrix(0.3, TimeLattice{T, N}).data());
    }
}
BENCHMARK(BM_VolterraMatrixBuild)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_CholeskyPaths(benchmark::State& state)
{
    const HurstSpectrum spec{{0.3, 0.5, 0.7}, {0.5, 0.3, 0.2}, 1.0};
    const TimeLattice lat{1.0, 32};
    const auto M = static_cast<std::size_t>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(cholesky_fbm(spec, lat, M, 7).fbm.data());
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CholeskyPaths)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_StochasticExponential(benchmark::State& state)
{
    const HurstSpectrum spec{{0.3, 0.7}, {1.0, 1.0}, 1.0};
    const TimeLattice lat{1.0, 32};
    const auto M = static_cast<std::size_t>(state.range(0));
    const auto paths = volterra_fbm(spec, lat, M, 3);
    std::vector<double> u(M * 2 * 32);
    for (std::size_t i = 0; i < u.size(); ++i)
        u[i] = 0.5 * std::tanh(paths.fbm[i % paths.fbm.size()]);
    for (auto _ : state)
        benchmark::DoNotOptimize(stochastic_exponential(u, paths).data());
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_StochasticExponential)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
