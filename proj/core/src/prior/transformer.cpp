#include "wag3d/prior/transformer.hpp"

#include <cmath>

namespace wag3d {

using nn::Graph;
using nn::NodePtr;
using nn::ParamStore;

void PriorConfig::validate() const {
    require(width >= 8, "width too small");
    require(depth >= 1, "depth must be >= 1");
    require(heads >= 1 && width % heads == 0, "width ", width, " not divisible by heads ", heads);
    require(vocab >= 2, "vocab must be >= 2");
    require(num_classes >= 1, "need at least one class");
    require(latent_dim >= 1, "latent_dim must be positive");
    require(label_dropout >= 0.0 && label_dropout < 1.0, "label_dropout in [0,1)");
    require(qk_scale_init > 0.0, "qk_scale_init must be positive");
    ScaleSchedule::cubic(schedule_sides, interp).validate();
}

KvMap PriorConfig::to_kv() const {
    KvMap kv;
    kv.set_int("width", width);
    kv.set_int("depth", depth);
    kv.set_int("heads", heads);
    kv.set_int("vocab", vocab);
    kv.set_int("num_classes", num_classes);
    kv.set_int("latent_dim", latent_dim);
    {
        std::string s;
        for (size_t i = 0; i < schedule_sides.size(); ++i)
            s += (i ? "," : "") + std::to_string(schedule_sides[i]);
        kv.set("schedule", s);
    }
    kv.set("interp", interp == InterpMode::trilinear ? "trilinear" : "nearest");
    kv.set_double("label_dropout", label_dropout);
    kv.set_double("qk_scale_init", qk_scale_init);
    kv.set_double("ln_eps", ln_eps);
    return kv;
}

PriorConfig PriorConfig::from_kv(const KvMap& kv) {
    PriorConfig cfg;
    cfg.width = static_cast<int>(kv.get_int("width"));
    cfg.depth = static_cast<int>(kv.get_int("depth"));
    cfg.heads = static_cast<int>(kv.get_int("heads"));
    cfg.vocab = kv.get_int("vocab");
    cfg.num_classes = static_cast<int>(kv.get_int("num_classes"));
    cfg.latent_dim = static_cast<int>(kv.get_int("latent_dim"));
    cfg.schedule_sides = kv.get_int_list("schedule");
    cfg.interp = kv.get("interp", "trilinear") == "nearest" ? InterpMode::nearest
                                                            : InterpMode::trilinear;
    cfg.label_dropout = kv.get_double("label_dropout", 0.1);
    cfg.qk_scale_init = kv.get_double("qk_scale_init", 10.0);
    cfg.ln_eps = kv.get_double("ln_eps", 1e-6);
    cfg.validate();
    return cfg;
}

PriorNet::PriorNet(PriorConfig cfg) : cfg_(std::move(cfg)), layout_(SequenceLayout::build(cfg_.schedule())) {
    cfg_.validate();
}

void PriorNet::register_params(ParamStore& p, RngStream& rng) const {
    const int w = cfg_.width;
    const int K = static_cast<int>(cfg_.schedule_sides.size());
    int max_side = 1;
    for (int s : cfg_.schedule_sides) max_side = std::max(max_side, s);

    auto linear = [&](const std::string& name, int in, int out, double stddev) {
        p.ensure(name + ".w", {in, out}, nn::normal_init(&rng, stddev));
        p.ensure(name + ".b", {out}, nn::zeros_init());
    };

    p.ensure("emb.class", {cfg_.num_classes + 1, w}, nn::normal_init(&rng, 0.02));
    p.ensure("emb.start", {w}, nn::normal_init(&rng, 0.02));
    p.ensure("emb.scale", {K, w}, nn::normal_init(&rng, 0.02));
    p.ensure("emb.x", {max_side, w}, nn::normal_init(&rng, 0.02));
    p.ensure("emb.y", {max_side, w}, nn::normal_init(&rng, 0.02));
    p.ensure("emb.z", {max_side, w}, nn::normal_init(&rng, 0.02));
    linear("in", cfg_.latent_dim, w, 0.02);

    for (int i = 0; i < cfg_.depth; ++i) {
        std::string blk = "blk" + std::to_string(i);
        // modulation starts at zero so every block begins as the identity
        p.ensure(blk + ".mod.w", {w, 6 * w}, nn::zeros_init());
        p.ensure(blk + ".mod.b", {6 * w}, nn::zeros_init());
        linear(blk + ".q", w, w, 0.02);
        linear(blk + ".k", w, w, 0.02);
        linear(blk + ".v", w, w, 0.02);
        linear(blk + ".o", w, w, 0.02 / std::sqrt(2.0 * cfg_.depth));
        p.ensure(blk + ".qscale", {cfg_.heads}, nn::const_init(cfg_.qk_scale_init));
        linear(blk + ".fc1", w, 4 * w, 0.02);
        linear(blk + ".fc2", 4 * w, w, 0.02 / std::sqrt(2.0 * cfg_.depth));
    }
    p.ensure("head.mod.w", {w, 2 * w}, nn::zeros_init());
    p.ensure("head.mod.b", {2 * w}, nn::zeros_init());
    linear("head", w, static_cast<int>(cfg_.vocab), 0.02);
}

namespace {

NodePtr linear(Graph& g, ParamStore& p, NodePtr x, const std::string& name) {
    return nn::add_rowvec(g, nn::matmul(g, x, p.use(g, name + ".w")), p.use(g, name + ".b"));
}

// (1, n) -> (n)
NodePtr as_vec(Graph& g, NodePtr row) { return nn::reshape(g, row, {row->value.dim(1)}); }

NodePtr modulate(Graph& g, NodePtr x, NodePtr gamma, NodePtr beta) {
    Tensor ones_t({gamma->value.dim(0)});
    for (int64_t i = 0; i < ones_t.numel(); ++i) ones_t[i] = 1.0;
    NodePtr one_plus = nn::add(g, g.leaf(std::move(ones_t), false), gamma);
    return nn::add_rowvec(g, nn::mul_rowvec(g, x, one_plus), beta);
}

} // namespace

NodePtr PriorNet::block(Graph& g, ParamStore& p, NodePtr h, NodePtr cond, NodePtr mask,
                        int index, PriorInstrumentation* hooks) const {
    const std::string blk = "blk" + std::to_string(index);
    const int64_t L = h->value.dim(0);
    const int dh = cfg_.width / cfg_.heads;

    NodePtr mod = linear(g, p, nn::silu(g, cond), blk + ".mod");
    auto mod_slice = [&](int i) {
        return as_vec(g, nn::slice_cols(g, mod, static_cast<int64_t>(i) * cfg_.width,
                                        static_cast<int64_t>(i + 1) * cfg_.width));
    };
    NodePtr g1 = mod_slice(0), b1 = mod_slice(1), a1 = mod_slice(2);
    NodePtr g2 = mod_slice(3), b2 = mod_slice(4), a2 = mod_slice(5);

    // attention with unit-normalized queries and keys
    NodePtr t = modulate(g, nn::standardize_rows(g, h, cfg_.ln_eps), g1, b1);
    NodePtr q = linear(g, p, t, blk + ".q");
    NodePtr k = linear(g, p, t, blk + ".k");
    NodePtr v = linear(g, p, t, blk + ".v");
    NodePtr qscale = p.use(g, blk + ".qscale");

    std::vector<NodePtr> ctx;
    for (int head = 0; head < cfg_.heads; ++head) {
        NodePtr qh = nn::normalize_rows(g, nn::slice_cols(g, q, head * dh, (head + 1) * dh));
        NodePtr kh = nn::normalize_rows(g, nn::slice_cols(g, k, head * dh, (head + 1) * dh));
        NodePtr vh = nn::slice_cols(g, v, head * dh, (head + 1) * dh);
        if (hooks) {
            hooks->qk_pairs_total += L * L;
            if (index == 0 && head == 0) hooks->qk_token_pairs += (L - 1) * (L - 1);
            for (const NodePtr& side : {qh, kh}) {
                for (int64_t r = 0; r < L; ++r) {
                    double ss = 0.0;
                    for (int64_t c = 0; c < dh; ++c) {
                        double x = side->value[r * dh + c];
                        ss += x * x;
                    }
                    hooks->max_qk_unit_err =
                        std::max(hooks->max_qk_unit_err, std::abs(std::sqrt(ss) - 1.0));
                }
            }
        }
        NodePtr sh = nn::slice_cols(g, nn::reshape(g, qscale, {1, cfg_.heads}), head, head + 1);
        NodePtr scores = nn::mul_scalar_node(g, nn::matmul(g, qh, nn::transpose2d(g, kh)), sh);
        scores = nn::add(g, scores, mask);
        NodePtr attn = nn::softmax_rows(g, scores);
        ctx.push_back(nn::matmul(g, attn, vh));
    }
    NodePtr merged = cfg_.heads == 1 ? ctx[0] : nn::concat_cols(g, ctx);
    NodePtr attn_out = linear(g, p, merged, blk + ".o");
    h = nn::add(g, h, nn::mul_rowvec(g, attn_out, a1));

    NodePtr m = modulate(g, nn::standardize_rows(g, h, cfg_.ln_eps), g2, b2);
    NodePtr mlp = linear(g, p, nn::gelu(g, linear(g, p, m, blk + ".fc1")), blk + ".fc2");
    return nn::add(g, h, nn::mul_rowvec(g, mlp, a2));
}

NodePtr PriorNet::logits(Graph& g, ParamStore& p, const Tensor& inputs, int class_id,
                         const Tensor& mask_bias, PriorInstrumentation* hooks) const {
    require(class_id >= 0 && class_id <= cfg_.num_classes, "class id ", class_id,
            " out of range (null class is ", cfg_.num_classes, ")");
    const int64_t n_tok = inputs.dim(0);
    require(inputs.ndim() == 2 && inputs.dim(1) == cfg_.latent_dim,
            "prior inputs must be (tokens, latent_dim)");
    require(n_tok >= 1 && n_tok <= layout_.total_len - 1, "token row count out of range");
    const int64_t rows = n_tok + 1;
    require(mask_bias.ndim() == 2 && mask_bias.dim(0) == rows && mask_bias.dim(1) == rows,
            "mask bias must be (rows, rows)");
    if (hooks) ++hooks->model_invocations;

    NodePtr cond = nn::row_gather(g, p.use(g, "emb.class"), {class_id}); // (1, w)

    // token rows: projected prefix features + scale and coordinate embeddings
    std::vector<int64_t> scale_ix(static_cast<size_t>(n_tok)), xs(static_cast<size_t>(n_tok)),
        ys(static_cast<size_t>(n_tok)), zs(static_cast<size_t>(n_tok));
    for (int64_t i = 0; i < n_tok; ++i) {
        const auto& tp = layout_.tokens[static_cast<size_t>(i)];
        scale_ix[static_cast<size_t>(i)] = tp.scale - 1;
        xs[static_cast<size_t>(i)] = tp.x;
        ys[static_cast<size_t>(i)] = tp.y;
        zs[static_cast<size_t>(i)] = tp.z;
    }
    NodePtr feats = g.leaf(inputs, false);
    NodePtr tok = linear(g, p, feats, "in");
    tok = nn::add(g, tok, nn::row_gather(g, p.use(g, "emb.scale"), scale_ix));
    tok = nn::add(g, tok, nn::row_gather(g, p.use(g, "emb.x"), xs));
    tok = nn::add(g, tok, nn::row_gather(g, p.use(g, "emb.y"), ys));
    tok = nn::add(g, tok, nn::row_gather(g, p.use(g, "emb.z"), zs));

    NodePtr start = nn::add_rowvec(g, cond, p.use(g, "emb.start")); // (1, w)
    NodePtr h = nn::concat_rows(g, {start, tok});

    NodePtr mask = g.leaf(mask_bias, false);
    for (int i = 0; i < cfg_.depth; ++i) h = block(g, p, h, cond, mask, i, hooks);

    NodePtr mod = linear(g, p, nn::silu(g, cond), "head.mod");
    NodePtr gf = as_vec(g, nn::slice_cols(g, mod, 0, cfg_.width));
    NodePtr bf = as_vec(g, nn::slice_cols(g, mod, cfg_.width, 2 * cfg_.width));
    NodePtr t = modulate(g, nn::standardize_rows(g, h, cfg_.ln_eps), gf, bf);
    return linear(g, p, nn::slice_rows(g, t, 1, rows), "head");
}

} // namespace wag3d
