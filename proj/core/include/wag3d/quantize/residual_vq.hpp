#pragma once

#include <vector>

#include "wag3d/quantize/schedule.hpp"
#include "wag3d/quantize/token_pyramid.hpp"
#include "wag3d/quantize/variants.hpp"
#include "wag3d/rng.hpp"
#include "wag3d/tensor.hpp"

namespace wag3d {

// Feature maps are shaped (C, sz, sy, sx), x fastest. Resampling uses
// half-pixel-center coordinates with edge clamping; trilinear interpolates
// x, then y, then z.
Tensor resample3d(const Tensor& src, const std::array<int, 3>& target, InterpMode mode);

// The K-1 per-scale refinement convolutions (kernel 3, channel preserving)
// applied after upsampling a quantized scale back to the latent resolution.
// The final scale is the identity.
struct ScaleRefiners {
    int64_t dim = 0;
    std::vector<Tensor> weight; // (C, C, 3, 3, 3) each, scales 1..K-1
    std::vector<Tensor> bias;   // (C,)

    int count() const { return static_cast<int>(weight.size()) + 1; } // = K
    void validate(int64_t expected_dim, int expected_scales) const;

    // identity start: centre tap is the unit matrix
    static ScaleRefiners identity(int64_t dim, int scale_count);
    // identity plus small noise on every tap
    static ScaleRefiners identity_jittered(int64_t dim, int scale_count, double stddev,
                                           RngStream& rng);

    Tensor apply(int k, const Tensor& x) const; // k in 1..K; k == K passes through
};

// Residual pair recorded per scale during encoding: the downsampled residual
// z_k_res and its quantized estimate zhat_k_res (both C x scale_k), which the
// stage-1 commitment term consumes.
struct ResidualPair {
    Tensor residual;
    Tensor quantized;
};

struct EncodeResult {
    TokenMapPyramid tokens;
    std::vector<ResidualPair> pairs;
    Tensor final_residual; // what remains of z after all K scales
};

// Progressive multi-scale encoding: the running residual starts at z; at each
// scale it is downsampled (no convolution), quantized per voxel, and the
// refined upsampled quantization is subtracted.
EncodeResult encode_multiscale(const Tensor& z, const Quantizer& quantizer,
                               const ScaleSchedule& schedule, const ScaleRefiners& refiners);

// Reverse pass: accumulate the refined upsampled lookups of every scale.
Tensor reconstruct_multiscale(const TokenMapPyramid& tokens, const Quantizer& quantizer,
                              const ScaleSchedule& schedule, const ScaleRefiners& refiners);

} // namespace wag3d
