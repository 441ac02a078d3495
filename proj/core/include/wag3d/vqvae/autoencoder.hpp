#pragma once

#include <string>

#include "wag3d/kvconfig.hpp"
#include "wag3d/nn/adam.hpp"
#include "wag3d/nn/ops.hpp"

namespace wag3d {

// 3D convolutional encoder/decoder pair around the multi-scale quantizer.
// L resolution levels with L-1 stride-2 downsamples, so the latent side is
// input_side / 2^(L-1). Channels stay at base_channels through the trunk.
struct AutoencoderConfig {
    int in_channels = 8;
    int base_channels = 16;
    int downsample_levels = 2; // L, 2 or 3
    int latent_channels = 8;   // C_z
    bool mid_attention = true; // attention block in the bottleneck stack
    int gn_groups = 8;
    double gn_eps = 1e-6;

    void validate() const;
    int latent_side(int input_side) const;
    KvMap to_kv(const std::string& prefix) const;
    static AutoencoderConfig from_kv(const KvMap& kv, const std::string& prefix);
};

// Stateless forward builders; parameters live in the shared store under
// "enc/..." and "dec/...".
class Autoencoder {
public:
    Autoencoder(AutoencoderConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

    const AutoencoderConfig& config() const { return cfg_; }

    void register_params(nn::ParamStore& params, RngStream& rng) const;

    // (C_in, s, s, s) -> (C_z, s/2^(L-1), ...)
    nn::NodePtr encode(nn::Graph& g, nn::ParamStore& params, nn::NodePtr x) const;
    // (C_z, m, m, m) -> (C_in, m * 2^(L-1), ...)
    nn::NodePtr decode(nn::Graph& g, nn::ParamStore& params, nn::NodePtr z) const;

private:
    nn::NodePtr res_block(nn::Graph& g, nn::ParamStore& p, nn::NodePtr x,
                          const std::string& name) const;
    nn::NodePtr attn_block(nn::Graph& g, nn::ParamStore& p, nn::NodePtr x,
                           const std::string& name) const;
    nn::NodePtr norm_silu(nn::Graph& g, nn::ParamStore& p, nn::NodePtr x,
                          const std::string& name) const;

    AutoencoderConfig cfg_;
};

} // namespace wag3d
