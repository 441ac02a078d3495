#include <benchmark/benchmark.h>

#include "wag3d/geometry/sdf.hpp"
#include "wag3d/wavelet/packing.hpp"

using namespace wag3d;

namespace {

DistanceGrid sphere_grid(int n) {
    ProceduralSpec spec{PrimitiveKind::sphere, {0.3}, 0};
    return procedural_sdf(spec, n, 0.1);
}

void BM_dwt3(benchmark::State& state) {
    DistanceGrid grid = sphere_grid(static_cast<int>(state.range(0)));
    FilterBank fb = FilterBank::make(state.range(1) ? WaveletFamily::bior5_3 : WaveletFamily::haar);
    for (auto _ : state) {
        WaveletPyramid pyr = dwt3(grid, fb, 2);
        benchmark::DoNotOptimize(pyr.coarse.data());
    }
    state.SetItemsProcessed(state.iterations() * grid.n * grid.n * grid.n);
}

void BM_roundtrip(benchmark::State& state) {
    DistanceGrid grid = sphere_grid(static_cast<int>(state.range(0)));
    FilterBank fb = FilterBank::make(WaveletFamily::haar);
    for (auto _ : state) {
        DistanceGrid back = idwt3(dwt3(grid, fb, 2), fb);
        benchmark::DoNotOptimize(back.values.data());
    }
    state.SetItemsProcessed(state.iterations() * grid.n * grid.n * grid.n);
}

void BM_pack(benchmark::State& state) {
    DistanceGrid grid = sphere_grid(64);
    WaveletPyramid pyr = dwt3(grid, FilterBank::make(WaveletFamily::haar), 2);
    for (auto _ : state) {
        CompactWaveletVolume vol = pack(pyr, 2);
        benchmark::DoNotOptimize(vol.values.data());
    }
}

} // namespace

BENCHMARK(BM_dwt3)->Args({32, 0})->Args({64, 0})->Args({64, 1});
BENCHMARK(BM_roundtrip)->Arg(32)->Arg(64);
BENCHMARK(BM_pack);
