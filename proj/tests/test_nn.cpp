#include <doctest.h>

#include "wag3d/nn/ops.hpp"
#include "test_helpers.hpp"

using namespace wag3d;
using nn::Graph;
using nn::NodePtr;
using nn::ParamStore;
using wag3d::testing::fd_check;

namespace {

RngStream g_rng(2024);

Tensor random_tensor(std::vector<int64_t> shape, double scale = 1.0) {
    Tensor t(std::move(shape));
    for (int64_t i = 0; i < t.numel(); ++i) t[i] = scale * g_rng.normal();
    return t;
}

// probe-weighted sum turns any output into a scalar with nonzero gradients
NodePtr probe_loss(Graph& g, NodePtr out, const Tensor& probe) {
    return nn::sum_all(g, nn::mul(g, out, g.leaf(probe, false)));
}

} // namespace

TEST_CASE("elementwise and reduction gradients") {
    ParamStore params;
    params.ensure("a", {3, 4}, nn::normal_init(&g_rng, 1.0));
    params.ensure("b", {3, 4}, nn::normal_init(&g_rng, 1.0));
    Tensor probe = random_tensor({3, 4});
    auto build = [&](Graph& g, ParamStore& p) {
        NodePtr a = p.use(g, "a"), b = p.use(g, "b");
        NodePtr mix = nn::add(g, nn::mul(g, a, b), nn::scale(g, nn::sub(g, a, b), 0.7));
        NodePtr act = nn::add(g, nn::silu(g, mix), nn::gelu(g, mix));
        return nn::add_scalars(g, {probe_loss(g, act, probe), nn::l2_norm(g, a),
                                   nn::mean_all(g, b)});
    };
    auto rep = fd_check(params, build, 8);
    CHECK(rep.max_rel_err < 1e-6);
}

TEST_CASE("matmul and row ops gradients") {
    ParamStore params;
    params.ensure("x", {5, 3}, nn::normal_init(&g_rng, 1.0));
    params.ensure("w", {3, 4}, nn::normal_init(&g_rng, 0.5));
    params.ensure("v", {4}, nn::normal_init(&g_rng, 0.5));
    Tensor probe = random_tensor({5, 4});
    auto build = [&](Graph& g, ParamStore& p) {
        NodePtr h = nn::matmul(g, p.use(g, "x"), p.use(g, "w"));
        h = nn::add_rowvec(g, h, p.use(g, "v"));
        h = nn::mul_rowvec(g, h, p.use(g, "v"));
        return probe_loss(g, h, probe);
    };
    CHECK(fd_check(params, build, 8).max_rel_err < 1e-6);
}

TEST_CASE("slice, concat, transpose, gather gradients") {
    ParamStore params;
    params.ensure("x", {6, 4}, nn::normal_init(&g_rng, 1.0));
    params.ensure("table", {5, 4}, nn::normal_init(&g_rng, 1.0));
    Tensor probe = random_tensor({14, 4}); // 6 + 3 + 5 concatenated rows
    auto build = [&](Graph& g, ParamStore& p) {
        NodePtr x = p.use(g, "x");
        NodePtr top = nn::slice_rows(g, x, 0, 3);
        NodePtr bottom = nn::slice_rows(g, x, 3, 6);
        NodePtr left = nn::slice_cols(g, x, 0, 2);
        NodePtr right = nn::slice_cols(g, x, 2, 4);
        NodePtr joined = nn::concat_rows(
            g, {nn::concat_cols(g, {left, right}),
                nn::transpose2d(g, nn::transpose2d(g, nn::add(g, top, bottom))),
                nn::row_gather(g, p.use(g, "table"), {4, 0, 2, 2, 1})});
        return probe_loss(g, joined, probe);
    };
    CHECK(fd_check(params, build, 8).max_rel_err < 1e-6);
}

TEST_CASE("normalization gradients") {
    ParamStore params;
    params.ensure("x", {4, 6}, nn::normal_init(&g_rng, 1.0));
    Tensor probe = random_tensor({4, 6});
    auto build_std = [&](Graph& g, ParamStore& p) {
        return probe_loss(g, nn::standardize_rows(g, p.use(g, "x"), 1e-6), probe);
    };
    CHECK(fd_check(params, build_std, 10).max_rel_err < 1e-5);

    auto build_unit = [&](Graph& g, ParamStore& p) {
        return probe_loss(g, nn::normalize_rows(g, p.use(g, "x")), probe);
    };
    CHECK(fd_check(params, build_unit, 10).max_rel_err < 1e-5);
}

TEST_CASE("softmax and cross entropy gradients") {
    ParamStore params;
    params.ensure("logits", {6, 5}, nn::normal_init(&g_rng, 2.0));
    Tensor probe = random_tensor({6, 6});
    std::vector<int32_t> targets = {0, 3, 4, 1, 1, 2};
    auto build = [&](Graph& g, ParamStore& p) {
        NodePtr x = p.use(g, "logits");
        NodePtr attn = nn::softmax_rows(g, nn::matmul(g, x, nn::transpose2d(g, x)));
        return nn::add_scalars(
            g, {probe_loss(g, attn, probe), nn::cross_entropy_mean(g, x, targets)});
    };
    CHECK(fd_check(params, build, 10).max_rel_err < 1e-5);

    // uniform logits ==> CE is exactly ln(vocab)
    Graph g;
    NodePtr uniform = g.leaf(Tensor::full({4, 7}, 0.37), false);
    NodePtr ce = nn::cross_entropy_mean(g, uniform, {0, 6, 2, 3});
    CHECK(ce->value[0] == doctest::Approx(std::log(7.0)).epsilon(1e-12));
}

TEST_CASE("volume op gradients") {
    ParamStore params;
    params.ensure("x", {2, 4, 4, 4}, nn::normal_init(&g_rng, 1.0));
    params.ensure("w", {3, 2, 3, 3, 3}, nn::normal_init(&g_rng, 0.3));
    params.ensure("b", {3}, nn::normal_init(&g_rng, 0.1));
    params.ensure("g", {2}, nn::const_init(1.0));
    params.ensure("beta", {2}, nn::zeros_init());
    Tensor probe_conv = random_tensor({3, 4, 4, 4});
    Tensor probe_s2 = random_tensor({3, 2, 2, 2});
    Tensor probe_up = random_tensor({2, 8, 8, 8});
    Tensor probe_re = random_tensor({2, 3, 3, 3});
    Tensor probe_gn = random_tensor({2, 4, 4, 4});
    auto build = [&](Graph& g, ParamStore& p) {
        NodePtr x = p.use(g, "x");
        NodePtr conv = nn::conv3d_op(g, x, p.use(g, "w"), p.use(g, "b"));
        NodePtr down = nn::conv3d_s2_op(g, x, p.use(g, "w"), p.use(g, "b"));
        NodePtr up = nn::upsample2x_op(g, x);
        NodePtr re = nn::resample_op(g, x, {3, 3, 3}, true);
        NodePtr gn = nn::group_norm(g, x, p.use(g, "g"), p.use(g, "beta"), 2, 1e-6);
        return nn::add_scalars(g, {probe_loss(g, conv, probe_conv), probe_loss(g, down, probe_s2),
                                   probe_loss(g, up, probe_up), probe_loss(g, re, probe_re),
                                   probe_loss(g, gn, probe_gn)});
    };
    CHECK(fd_check(params, build, 8).max_rel_err < 1e-5);
}

TEST_CASE("layout conversions round trip with gradients") {
    ParamStore params;
    params.ensure("x", {3, 2, 2, 2}, nn::normal_init(&g_rng, 1.0));
    params.ensure("s", {1}, nn::const_init(1.5));
    Tensor probe = random_tensor({3, 2, 2, 2});
    auto build = [&](Graph& g, ParamStore& p) {
        NodePtr rows = nn::chw_to_nc(g, p.use(g, "x"));
        NodePtr back = nn::nc_to_chw(g, rows, {2, 2, 2});
        back = nn::mul_scalar_node(g, back, p.use(g, "s"));
        return probe_loss(g, back, probe);
    };
    CHECK(fd_check(params, build, 8).max_rel_err < 1e-6);

    Graph g;
    NodePtr x = g.leaf(random_tensor({3, 2, 2, 2}), false);
    NodePtr round = nn::nc_to_chw(g, nn::chw_to_nc(g, x), {2, 2, 2});
    CHECK(round->value.vec() == x->value.vec());
}

TEST_CASE("detach blocks gradients and straight-through passes them") {
    ParamStore params;
    params.ensure("z", {2, 3}, nn::normal_init(&g_rng, 1.0));
    // value equals recon (a constant), gradient of the loss flows to z as identity
    Tensor recon = random_tensor({2, 3});
    params.begin_step();
    Graph g;
    NodePtr z = params.use(g, "z");
    NodePtr st = nn::add(g, g.leaf(recon, false), nn::sub(g, z, nn::detach(g, z)));
    for (int64_t i = 0; i < st->value.numel(); ++i)
        CHECK(st->value[i] == doctest::Approx(recon[i]).epsilon(1e-15));
    NodePtr loss = nn::sum_all(g, st);
    g.backward(loss);
    params.collect_grads();
    for (int64_t i = 0; i < 6; ++i) CHECK(params.at("z").grad[i] == doctest::Approx(1.0));
}

TEST_CASE("adam determinism") {
    auto run = [&]() {
        RngStream rng(7);
        ParamStore params;
        params.ensure("w", {4, 4}, nn::normal_init(&rng, 1.0));
        nn::Adam opt{1e-2};
        Tensor probe = Tensor::full({4, 4}, 0.5);
        for (int step = 0; step < 25; ++step) {
            params.begin_step();
            Graph g;
            NodePtr w = params.use(g, "w");
            NodePtr loss = nn::sum_all(g, nn::mul(g, nn::silu(g, w), g.leaf(probe, false)));
            g.backward(loss);
            params.collect_grads();
            opt.step(params);
        }
        return params.at("w").value.vec();
    };
    CHECK(run() == run());
}
