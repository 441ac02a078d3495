#include <benchmark/benchmark.h>

#include "wag3d/quantize/residual_vq.hpp"
#include "wag3d/rng.hpp"

using namespace wag3d;

namespace {

void BM_encode_multiscale(benchmark::State& state) {
    RngStream rng(5);
    const int64_t C = 8;
    const int64_t V = state.range(0);
    ScaleSchedule sched = ScaleSchedule::cubic({1, 2, 3, 4});
    Codebook cb = Codebook::init(V, C, rng);
    NNQuantizer q(cb);
    ScaleRefiners refiners = ScaleRefiners::identity_jittered(C, sched.count(), 0.02, rng);
    Tensor z({C, 4, 4, 4});
    for (int64_t i = 0; i < z.numel(); ++i) z[i] = rng.normal();
    for (auto _ : state) {
        EncodeResult res = encode_multiscale(z, q, sched, refiners);
        benchmark::DoNotOptimize(res.tokens.maps.data());
    }
}

void BM_reconstruct_multiscale(benchmark::State& state) {
    RngStream rng(6);
    const int64_t C = 8;
    ScaleSchedule sched = ScaleSchedule::cubic({1, 2, 3, 4});
    Codebook cb = Codebook::init(128, C, rng);
    NNQuantizer q(cb);
    ScaleRefiners refiners = ScaleRefiners::identity_jittered(C, sched.count(), 0.02, rng);
    Tensor z({C, 4, 4, 4});
    for (int64_t i = 0; i < z.numel(); ++i) z[i] = rng.normal();
    TokenMapPyramid tokens = encode_multiscale(z, q, sched, refiners).tokens;
    for (auto _ : state) {
        Tensor recon = reconstruct_multiscale(tokens, q, sched, refiners);
        benchmark::DoNotOptimize(recon.data());
    }
}

} // namespace

BENCHMARK(BM_encode_multiscale)->Arg(128)->Arg(512)->Arg(8192);
BENCHMARK(BM_reconstruct_multiscale);
