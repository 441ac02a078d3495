#include <benchmark/benchmark.h>

#include "wag3d/nn/kernels.hpp"
#include "wag3d/rng.hpp"
#include "wag3d/tensor.hpp"

using namespace wag3d;

namespace {

void BM_conv3d(benchmark::State& state) {
    const int c = static_cast<int>(state.range(0));
    const int side = static_cast<int>(state.range(1));
    RngStream rng(2);
    Tensor x({c, side, side, side}), w({c, c, 3, 3, 3}), b({c});
    for (int64_t i = 0; i < x.numel(); ++i) x[i] = rng.normal();
    for (int64_t i = 0; i < w.numel(); ++i) w[i] = 0.05 * rng.normal();
    Tensor out({c, side, side, side});
    for (auto _ : state) {
        nn::conv3d(x.data(), c, side, side, side, w.data(), b.data(), c, 3, out.data());
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(c) * c * 27 * side * side *
                            side);
}

void BM_matmul(benchmark::State& state) {
    const int64_t n = state.range(0);
    RngStream rng(3);
    Tensor a({n, n}), b({n, n}), out({n, n});
    for (int64_t i = 0; i < a.numel(); ++i) a[i] = rng.normal();
    for (int64_t i = 0; i < b.numel(); ++i) b[i] = rng.normal();
    for (auto _ : state) {
        nn::matmul(a.data(), b.data(), out.data(), n, n, n);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * n * n * n);
}

void BM_resample(benchmark::State& state) {
    RngStream rng(4);
    Tensor src({8, 4, 4, 4}), dst({8, 16, 16, 16});
    for (int64_t i = 0; i < src.numel(); ++i) src[i] = rng.normal();
    for (auto _ : state) {
        nn::resample3d(src.data(), 8, 4, 4, 4, dst.data(), 16, 16, 16, true);
        benchmark::DoNotOptimize(dst.data());
    }
}

} // namespace

BENCHMARK(BM_conv3d)->Args({8, 8})->Args({16, 8})->Args({16, 16});
BENCHMARK(BM_matmul)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_resample);

BENCHMARK_MAIN();
