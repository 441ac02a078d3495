#include "wag3d/vqvae/autoencoder.hpp"

#include <cmath>

namespace wag3d {

using nn::Graph;
using nn::NodePtr;
using nn::ParamStore;

void AutoencoderConfig::validate() const {
    require(in_channels >= 1, "in_channels must be positive");
    require(base_channels >= 1, "base_channels must be positive");
    require(downsample_levels == 2 || downsample_levels == 3,
            "downsample_levels must be 2 or 3, got ", downsample_levels);
    require(latent_channels >= 1, "latent_channels must be positive");
    require(gn_groups >= 1 && base_channels % gn_groups == 0, "base_channels ", base_channels,
            " not divisible by gn_groups ", gn_groups);
    require(gn_eps > 0.0, "gn_eps must be positive");
}

int AutoencoderConfig::latent_side(int input_side) const {
    int div = 1 << (downsample_levels - 1);
    require(input_side % div == 0, "input side ", input_side, " not divisible by ", div);
    return input_side / div;
}

KvMap AutoencoderConfig::to_kv(const std::string& prefix) const {
    KvMap kv;
    kv.set_int(prefix + "in_channels", in_channels);
    kv.set_int(prefix + "base_channels", base_channels);
    kv.set_int(prefix + "downsample_levels", downsample_levels);
    kv.set_int(prefix + "latent_channels", latent_channels);
    kv.set(prefix + "mid_attention", mid_attention ? "true" : "false");
    kv.set_int(prefix + "gn_groups", gn_groups);
    kv.set_double(prefix + "gn_eps", gn_eps);
    return kv;
}

AutoencoderConfig AutoencoderConfig::from_kv(const KvMap& kv, const std::string& prefix) {
    AutoencoderConfig cfg;
    cfg.in_channels = static_cast<int>(kv.get_int(prefix + "in_channels"));
    cfg.base_channels = static_cast<int>(kv.get_int(prefix + "base_channels"));
    cfg.downsample_levels = static_cast<int>(kv.get_int(prefix + "downsample_levels"));
    cfg.latent_channels = static_cast<int>(kv.get_int(prefix + "latent_channels"));
    cfg.mid_attention = kv.get_bool(prefix + "mid_attention", true);
    cfg.gn_groups = static_cast<int>(kv.get_int(prefix + "gn_groups", 8));
    cfg.gn_eps = kv.get_double(prefix + "gn_eps", 1e-6);
    cfg.validate();
    return cfg;
}

namespace {

void conv_params(ParamStore& p, RngStream& rng, const std::string& name, int ci, int co, int k) {
    double stddev = std::sqrt(2.0 / (static_cast<double>(ci) * k * k * k));
    p.ensure(name + ".w", {co, ci, k, k, k}, nn::normal_init(&rng, stddev));
    p.ensure(name + ".b", {co}, nn::zeros_init());
}

void norm_params(ParamStore& p, const std::string& name, int c) {
    p.ensure(name + ".g", {c}, nn::const_init(1.0));
    p.ensure(name + ".b", {c}, nn::zeros_init());
}

NodePtr conv(Graph& g, ParamStore& p, NodePtr x, const std::string& name) {
    return nn::conv3d_op(g, x, p.use(g, name + ".w"), p.use(g, name + ".b"));
}

} // namespace

NodePtr Autoencoder::norm_silu(Graph& g, ParamStore& p, NodePtr x, const std::string& name) const {
    NodePtr h = nn::group_norm(g, x, p.use(g, name + ".g"), p.use(g, name + ".b"),
                               cfg_.gn_groups, cfg_.gn_eps);
    return nn::silu(g, h);
}

NodePtr Autoencoder::res_block(Graph& g, ParamStore& p, NodePtr x, const std::string& name) const {
    NodePtr h = norm_silu(g, p, x, name + ".gn1");
    h = conv(g, p, h, name + ".conv1");
    h = norm_silu(g, p, h, name + ".gn2");
    h = conv(g, p, h, name + ".conv2");
    return nn::add(g, x, h);
}

NodePtr Autoencoder::attn_block(Graph& g, ParamStore& p, NodePtr x, const std::string& name) const {
    const int64_t c = x->value.dim(0);
    std::array<int64_t, 3> dhw = {x->value.dim(1), x->value.dim(2), x->value.dim(3)};
    NodePtr h = nn::group_norm(g, x, p.use(g, name + ".gn.g"), p.use(g, name + ".gn.b"),
                               cfg_.gn_groups, cfg_.gn_eps);
    NodePtr rows = nn::chw_to_nc(g, h); // (N, C)
    NodePtr q = nn::add_rowvec(g, nn::matmul(g, rows, p.use(g, name + ".q.w")), p.use(g, name + ".q.b"));
    NodePtr k = nn::add_rowvec(g, nn::matmul(g, rows, p.use(g, name + ".k.w")), p.use(g, name + ".k.b"));
    NodePtr v = nn::add_rowvec(g, nn::matmul(g, rows, p.use(g, name + ".v.w")), p.use(g, name + ".v.b"));
    NodePtr scores = nn::scale(g, nn::matmul(g, q, nn::transpose2d(g, k)),
                               1.0 / std::sqrt(static_cast<double>(c)));
    NodePtr attn = nn::softmax_rows(g, scores);
    NodePtr ctx = nn::matmul(g, attn, v);
    NodePtr proj = nn::add_rowvec(g, nn::matmul(g, ctx, p.use(g, name + ".o.w")),
                                  p.use(g, name + ".o.b"));
    return nn::add(g, x, nn::nc_to_chw(g, proj, dhw));
}

void Autoencoder::register_params(ParamStore& p, RngStream& rng) const {
    const int C = cfg_.base_channels;
    auto res_params = [&](const std::string& name, int c) {
        norm_params(p, name + ".gn1", c);
        conv_params(p, rng, name + ".conv1", c, c, 3);
        norm_params(p, name + ".gn2", c);
        conv_params(p, rng, name + ".conv2", c, c, 3);
    };
    auto attn_params = [&](const std::string& name, int c) {
        norm_params(p, name + ".gn", c);
        double stddev = 1.0 / std::sqrt(static_cast<double>(c));
        for (const char* s : {".q", ".k", ".v", ".o"}) {
            p.ensure(name + s + ".w", {c, c}, nn::normal_init(&rng, stddev));
            p.ensure(name + s + ".b", {c}, nn::zeros_init());
        }
    };

    conv_params(p, rng, "enc.init", cfg_.in_channels, C, 3);
    for (int i = 1; i <= cfg_.downsample_levels; ++i) {
        res_params("enc.stage" + std::to_string(i) + ".res", C);
        if (i < cfg_.downsample_levels)
            conv_params(p, rng, "enc.stage" + std::to_string(i) + ".down", C, C, 3);
    }
    res_params("enc.mid.res1", C);
    if (cfg_.mid_attention) attn_params("enc.mid.attn", C);
    res_params("enc.mid.res2", C);
    norm_params(p, "enc.out.gn", C);
    conv_params(p, rng, "enc.out", C, cfg_.latent_channels, 3);

    conv_params(p, rng, "dec.init", cfg_.latent_channels, C, 3);
    res_params("dec.mid.res1", C);
    if (cfg_.mid_attention) attn_params("dec.mid.attn", C);
    res_params("dec.mid.res2", C);
    for (int i = cfg_.downsample_levels; i >= 1; --i) {
        res_params("dec.stage" + std::to_string(i) + ".res", C);
        if (i > 1) conv_params(p, rng, "dec.stage" + std::to_string(i) + ".up", C, C, 3);
    }
    norm_params(p, "dec.out.gn", C);
    conv_params(p, rng, "dec.out", C, cfg_.in_channels, 3);
}

NodePtr Autoencoder::encode(Graph& g, ParamStore& p, NodePtr x) const {
    require(x->value.ndim() == 4 && x->value.dim(0) == cfg_.in_channels,
            "encoder input must be (C_in, D, H, W)");
    NodePtr h = conv(g, p, x, "enc.init");
    for (int i = 1; i <= cfg_.downsample_levels; ++i) {
        h = res_block(g, p, h, "enc.stage" + std::to_string(i) + ".res");
        if (i < cfg_.downsample_levels) {
            std::string name = "enc.stage" + std::to_string(i) + ".down";
            h = nn::conv3d_s2_op(g, h, p.use(g, name + ".w"), p.use(g, name + ".b"));
        }
    }
    h = res_block(g, p, h, "enc.mid.res1");
    if (cfg_.mid_attention) h = attn_block(g, p, h, "enc.mid.attn");
    h = res_block(g, p, h, "enc.mid.res2");
    h = norm_silu(g, p, h, "enc.out.gn");
    return conv(g, p, h, "enc.out");
}

NodePtr Autoencoder::decode(Graph& g, ParamStore& p, NodePtr z) const {
    require(z->value.ndim() == 4 && z->value.dim(0) == cfg_.latent_channels,
            "decoder input must be (C_z, D, H, W)");
    NodePtr h = conv(g, p, z, "dec.init");
    h = res_block(g, p, h, "dec.mid.res1");
    if (cfg_.mid_attention) h = attn_block(g, p, h, "dec.mid.attn");
    h = res_block(g, p, h, "dec.mid.res2");
    for (int i = cfg_.downsample_levels; i >= 1; --i) {
        h = res_block(g, p, h, "dec.stage" + std::to_string(i) + ".res");
        if (i > 1) {
            h = nn::upsample2x_op(g, h);
            h = conv(g, p, h, "dec.stage" + std::to_string(i) + ".up");
        }
    }
    h = norm_silu(g, p, h, "dec.out.gn");
    return conv(g, p, h, "dec.out");
}

} // namespace wag3d
