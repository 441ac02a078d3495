#include "wag3d/quantize/residual_vq.hpp"

#include "wag3d/common.hpp"
#include "wag3d/nn/kernels.hpp"

namespace wag3d {

Tensor resample3d(const Tensor& src, const std::array<int, 3>& target, InterpMode mode) {
    require(src.ndim() == 4, "resample3d expects a (C, D, H, W) tensor");
    const int c = static_cast<int>(src.dim(0));
    Tensor out({c, target[2], target[1], target[0]});
    nn::resample3d(src.data(), c, static_cast<int>(src.dim(1)), static_cast<int>(src.dim(2)),
                   static_cast<int>(src.dim(3)), out.data(), target[2], target[1], target[0],
                   mode == InterpMode::trilinear);
    return out;
}

void ScaleRefiners::validate(int64_t expected_dim, int expected_scales) const {
    require(dim == expected_dim, "refiner channel dim ", dim, " != latent dim ", expected_dim);
    require(count() == expected_scales, "refiner count ", count(), " != schedule scales ",
            expected_scales);
    require(weight.size() == bias.size(), "refiner weight/bias count mismatch");
    for (const auto& wt : weight)
        require(wt.shape() == std::vector<int64_t>({dim, dim, 3, 3, 3}),
                "refiner weight must be (C, C, 3, 3, 3)");
    for (const auto& b : bias)
        require(b.shape() == std::vector<int64_t>({dim}), "refiner bias must be (C,)");
}

ScaleRefiners ScaleRefiners::identity(int64_t dim, int scale_count) {
    require(scale_count >= 1, "need at least one scale");
    ScaleRefiners r;
    r.dim = dim;
    for (int k = 0; k + 1 < scale_count; ++k) {
        Tensor wt({dim, dim, 3, 3, 3});
        for (int64_t c = 0; c < dim; ++c) wt.at(c, c, int64_t(1), int64_t(1), int64_t(1)) = 1.0;
        r.weight.push_back(std::move(wt));
        r.bias.push_back(Tensor({dim}));
    }
    return r;
}

ScaleRefiners ScaleRefiners::identity_jittered(int64_t dim, int scale_count, double stddev,
                                               RngStream& rng) {
    ScaleRefiners r = identity(dim, scale_count);
    for (auto& wt : r.weight)
        for (int64_t i = 0; i < wt.numel(); ++i) wt[i] += stddev * rng.normal();
    return r;
}

Tensor ScaleRefiners::apply(int k, const Tensor& x) const {
    require(k >= 1 && k <= count(), "refiner scale ", k, " out of range");
    if (k == count()) return x; // identity at the final scale
    const auto& wt = weight[static_cast<size_t>(k - 1)];
    const auto& b = bias[static_cast<size_t>(k - 1)];
    Tensor out(x.shape());
    nn::conv3d(x.data(), static_cast<int>(x.dim(0)), static_cast<int>(x.dim(1)),
               static_cast<int>(x.dim(2)), static_cast<int>(x.dim(3)), wt.data(), b.data(),
               static_cast<int>(dim), 3, out.data());
    return out;
}

namespace {

// per-voxel quantization of a (C, D, H, W) map; returns indices and the
// looked-up feature map
void quantize_map(const Tensor& features, const Quantizer& q, std::vector<int32_t>& indices,
                  Tensor& looked_up) {
    const int64_t C = features.dim(0);
    const int64_t vox = features.numel() / C;
    indices.resize(static_cast<size_t>(vox));
    looked_up = Tensor(features.shape());
    std::vector<double> v(static_cast<size_t>(C)), o(static_cast<size_t>(C));
    for (int64_t p = 0; p < vox; ++p) {
        for (int64_t c = 0; c < C; ++c) v[static_cast<size_t>(c)] = features[c * vox + p];
        int64_t idx = q.quantize(v.data());
        indices[static_cast<size_t>(p)] = static_cast<int32_t>(idx);
        q.lookup(idx, o.data());
        for (int64_t c = 0; c < C; ++c) looked_up[c * vox + p] = o[static_cast<size_t>(c)];
    }
}

} // namespace

EncodeResult encode_multiscale(const Tensor& z, const Quantizer& quantizer,
                               const ScaleSchedule& schedule, const ScaleRefiners& refiners) {
    schedule.validate();
    require(z.ndim() == 4, "latent must be (C, D, H, W)");
    const int64_t C = z.dim(0);
    require(C == quantizer.dim(), "latent channels ", C, " != quantizer dim ", quantizer.dim());
    require(quantizer.vocab() >= 2, "empty quantizer vocabulary");
    const auto& fin = schedule.final_scale();
    require(z.dim(3) == fin[0] && z.dim(2) == fin[1] && z.dim(1) == fin[2],
            "latent shape does not match the schedule's final scale");
    refiners.validate(C, schedule.count());

    EncodeResult res;
    res.tokens.vocab = quantizer.vocab();
    Tensor residual = z;
    for (int k = 1; k <= schedule.count(); ++k) {
        const auto& scale = schedule.at(k);
        Tensor rk = resample3d(residual, scale, schedule.interp);
        std::vector<int32_t> indices;
        Tensor ek;
        quantize_map(rk, quantizer, indices, ek);
        res.tokens.maps.push_back(std::move(indices));
        res.tokens.scales.push_back(scale);

        Tensor up = resample3d(ek, fin, schedule.interp);
        Tensor refined = refiners.apply(k, up);
        for (int64_t i = 0; i < residual.numel(); ++i) residual[i] -= refined[i];

        res.pairs.push_back({std::move(rk), std::move(ek)});
    }
    res.final_residual = std::move(residual);
    res.tokens.validate_against(schedule);
    return res;
}

Tensor reconstruct_multiscale(const TokenMapPyramid& tokens, const Quantizer& quantizer,
                              const ScaleSchedule& schedule, const ScaleRefiners& refiners) {
    schedule.validate();
    tokens.validate_against(schedule);
    require(tokens.vocab == quantizer.vocab(), "token vocabulary ", tokens.vocab,
            " != quantizer vocabulary ", quantizer.vocab());
    const int64_t C = quantizer.dim();
    refiners.validate(C, schedule.count());
    const auto& fin = schedule.final_scale();

    Tensor acc({C, fin[2], fin[1], fin[0]});
    std::vector<double> code(static_cast<size_t>(C));
    for (int k = 1; k <= schedule.count(); ++k) {
        const auto& scale = schedule.at(k);
        const auto& map = tokens.maps[static_cast<size_t>(k - 1)];
        Tensor ek({C, scale[2], scale[1], scale[0]});
        const int64_t vox = schedule.flat_size(k);
        for (int64_t p = 0; p < vox; ++p) {
            quantizer.lookup(map[static_cast<size_t>(p)], code.data());
            for (int64_t c = 0; c < C; ++c) ek[c * vox + p] = code[static_cast<size_t>(c)];
        }
        Tensor up = resample3d(ek, fin, schedule.interp);
        Tensor refined = refiners.apply(k, up);
        for (int64_t i = 0; i < acc.numel(); ++i) acc[i] += refined[i];
    }
    return acc;
}

} // namespace wag3d
