#include <benchmark/benchmark.h>

#include "qlis/scattering.hpp"

using namespace qlis;

namespace {

ScatteringSetup setup_for(int n)
{
    FrequencyGrid g = FrequencyGrid::centered(n, 1.0, 16.0 / n);
    TwoModeState st = TwoModeState::from_amplitude(
        product_amplitude(gaussian_envelope(g, 1.0, 0.8, -0.5), gaussian_envelope(g, 0.9, 0.7, 0.6)));
    const double dt = conjugate_time_grid(g).dt;
    return make_scattering_setup(st, delayed_balanced_bs(2 * dt), ScatteringRoute::interaction_order, n - 2);
}

const MatterSystem& matter()
{
    static const MatterSystem m = v_system(1.0, 0.6, 0.5, 1.0, 0.8);
    return m;
}

void BM_scatter_grid(benchmark::State& state)
{
    ScatteringSetup s = setup_for(int(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(scatter_grid(s, matter()));
}

void BM_scatter_grid_reference(benchmark::State& state)
{
    ScatteringSetup s = setup_for(int(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(scatter_grid_reference(s, matter()));
}

} // namespace

BENCHMARK(BM_scatter_grid)->Arg(16)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_scatter_grid_reference)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
