#include "wag3d/prior/stage2.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "wag3d/wavelet/dwt.hpp"

namespace wag3d {

using nn::Graph;
using nn::NodePtr;

Stage2Model Stage2Model::create(const PriorConfig& cfg, double lr, uint64_t seed,
                                uint64_t stage1_hash) {
    cfg.validate();
    Stage2Model model{cfg,
                      PriorNet(cfg),
                      nn::ParamStore{},
                      nn::Adam{lr},
                      RngStream::derive(seed, "stage2-train"),
                      0,
                      stage1_hash};
    RngStream init_rng = RngStream::derive(seed, "stage2-init");
    model.net.register_params(model.params, init_rng);
    return model;
}

void Stage2Model::save(const std::string& path) const {
    nn::Checkpoint ck;
    for (const auto& [name, p] : params.all()) {
        ck.put_tensor("param/" + name, p.value);
        ck.put_tensor("adam_m/" + name, p.m);
        ck.put_tensor("adam_v/" + name, p.v);
    }
    ck.put_string("config", cfg.to_kv().serialize());
    ck.put_string("rng_state", train_rng.state());
    ck.put_i64("step", step);
    ck.put_i64("adam_steps", opt.step_count);
    ck.put_i64("stage1_hash", static_cast<int64_t>(stage1_hash));
    ck.put_f64_array("lr", {opt.lr});
    ck.put_string("kind", "stage2");
    ck.save(path);
}

Stage2Model Stage2Model::load(const std::string& path) {
    nn::Checkpoint ck = nn::Checkpoint::load(path);
    require(ck.get_string("kind") == "stage2", path, " is not a stage-2 checkpoint");
    PriorConfig cfg = PriorConfig::from_kv(KvMap::parse(ck.get_string("config")));
    double lr = ck.get_f64_array("lr")[0];
    Stage2Model model = create(cfg, lr, 0, static_cast<uint64_t>(ck.get_i64("stage1_hash")));
    for (auto& [name, p] : model.params.all()) {
        p.value = ck.get_tensor("param/" + name);
        p.m = ck.get_tensor("adam_m/" + name);
        p.v = ck.get_tensor("adam_v/" + name);
    }
    model.train_rng.set_state(ck.get_string("rng_state"));
    model.step = ck.get_i64("step");
    model.opt.step_count = ck.get_i64("adam_steps");
    return model;
}

Tensor teacher_forced_inputs(const TokenMapPyramid& pyramid, const Quantizer& quantizer,
                             const ScaleSchedule& schedule, const ScaleRefiners& refiners,
                             int upto) {
    schedule.validate();
    require(upto >= 1 && upto <= schedule.count(), "upto scale out of range");
    require(static_cast<int>(pyramid.maps.size()) >= upto - 1,
            "pyramid must contain every scale below 'upto'");
    const int64_t C = quantizer.dim();
    refiners.validate(C, schedule.count());
    const auto& fin = schedule.final_scale();

    int64_t rows = 0;
    for (int k = 1; k <= upto; ++k) rows += schedule.flat_size(k);
    Tensor out({rows, C});

    Tensor acc({C, fin[2], fin[1], fin[0]});
    std::vector<double> code(static_cast<size_t>(C));
    int64_t row = 0;
    for (int k = 1; k <= upto; ++k) {
        const auto& scale = schedule.at(k);
        const int64_t vox = schedule.flat_size(k);
        // block input: reconstruction of scales < k, resampled to this scale
        Tensor feat = resample3d(acc, scale, schedule.interp);
        for (int64_t p = 0; p < vox; ++p)
            for (int64_t c = 0; c < C; ++c) out[(row + p) * C + c] = feat[c * vox + p];
        row += vox;

        if (k == upto) break; // tokens of the last requested block are unused
        const auto& map = pyramid.maps[static_cast<size_t>(k - 1)];
        require(static_cast<int64_t>(map.size()) == vox, "pyramid scale ", k, " size mismatch");
        Tensor ek({C, scale[2], scale[1], scale[0]});
        for (int64_t p = 0; p < vox; ++p) {
            quantizer.lookup(map[static_cast<size_t>(p)], code.data());
            for (int64_t c = 0; c < C; ++c) ek[c * vox + p] = code[static_cast<size_t>(c)];
        }
        Tensor up = resample3d(ek, fin, schedule.interp);
        Tensor refined = refiners.apply(k, up);
        for (int64_t i = 0; i < acc.numel(); ++i) acc[i] += refined[i];
    }
    return out;
}

Stage2Loss stage2_loss_value(const Tensor& logits, const TokenMapPyramid& targets) {
    targets.validate();
    const int64_t V = logits.dim(1);
    int64_t rows = 0;
    for (const auto& m : targets.maps) rows += static_cast<int64_t>(m.size());
    require(logits.dim(0) == rows, "logit rows ", logits.dim(0), " != token count ", rows);

    Stage2Loss loss{0.0, {}};
    int64_t row = 0;
    for (const auto& map : targets.maps) {
        double scale_ce = 0.0;
        for (int32_t t : map) {
            const double* lr = logits.data() + row * V;
            double mx = lr[0];
            for (int64_t c = 1; c < V; ++c) mx = std::max(mx, lr[c]);
            double z = 0.0;
            for (int64_t c = 0; c < V; ++c) z += std::exp(lr[c] - mx);
            scale_ce += mx + std::log(z) - lr[t];
            ++row;
        }
        loss.per_scale.push_back(scale_ce / static_cast<double>(map.size()));
        loss.total += scale_ce;
    }
    loss.total /= static_cast<double>(rows);
    return loss;
}

namespace {

std::vector<int32_t> flatten_targets(const TokenMapPyramid& pyramid) {
    std::vector<int32_t> out;
    for (const auto& m : pyramid.maps) out.insert(out.end(), m.begin(), m.end());
    return out;
}

} // namespace

Stage2StepStats train_step_stage2(Stage2Model& model, const Stage1Model& stage1,
                                  const std::vector<const TokenSample*>& batch) {
    require(!batch.empty(), "empty stage-2 batch");
    const ScaleSchedule sched = model.cfg.schedule();
    const SequenceLayout& layout = model.net.layout();
    auto quantizer = stage1.make_quantizer();
    ScaleRefiners refiners = stage1.refiners_view();
    Tensor mask = mask_to_bias(build_block_causal_mask(layout), layout.total_len);

    model.params.begin_step();
    Graph g;
    std::vector<NodePtr> losses;
    std::vector<double> per_scale(static_cast<size_t>(sched.count()), 0.0);
    for (const auto* sample : batch) {
        sample->pyramid.validate_against(sched);
        int cid = sample->class_id;
        require(cid >= 0 && cid <= model.cfg.num_classes, "bad class id in batch");
        if (model.cfg.label_dropout > 0.0 &&
            model.train_rng.uniform() < model.cfg.label_dropout)
            cid = model.cfg.null_class();
        Tensor inputs =
            teacher_forced_inputs(sample->pyramid, *quantizer, sched, refiners, sched.count());
        NodePtr logits = model.net.logits(g, model.params, inputs, cid, mask, nullptr);
        std::vector<double> ce_rows;
        NodePtr ce = nn::cross_entropy_mean(g, logits, flatten_targets(sample->pyramid), &ce_rows);
        losses.push_back(ce);
        int64_t row = 0;
        for (int k = 1; k <= sched.count(); ++k) {
            double s = 0.0;
            for (int64_t i = 0; i < sched.flat_size(k); ++i) s += ce_rows[static_cast<size_t>(row++)];
            per_scale[static_cast<size_t>(k - 1)] +=
                s / (static_cast<double>(sched.flat_size(k)) * batch.size());
        }
    }
    NodePtr loss = nn::scale(g, nn::add_scalars(g, losses), 1.0 / static_cast<double>(batch.size()));
    require(std::isfinite(loss->value[0]),
            "stage-2 training diverged (non-finite loss) at step ", model.step);
    g.backward(loss);
    model.params.collect_grads();
    model.opt.step(model.params);
    ++model.step;
    return {loss->value[0], per_scale};
}

Stage2Model train_stage2(const std::vector<TokenSample>& dataset, const Stage1Model& stage1,
                         const PriorConfig& cfg, double lr, int64_t steps, uint64_t seed,
                         uint64_t stage1_hash, std::ostream* log) {
    require(!dataset.empty(), "stage-2 dataset is empty");
    require(cfg.vocab == stage1.cfg.vocab, "prior vocab ", cfg.vocab, " != stage-1 vocab ",
            stage1.cfg.vocab);
    require(cfg.schedule_sides == stage1.cfg.schedule_sides,
            "prior schedule differs from the stage-1 schedule");
    Stage2Model model = Stage2Model::create(cfg, lr, seed, stage1_hash);
    const int64_t n = static_cast<int64_t>(dataset.size());
    const int batch_size = std::max<int>(1, std::min<int64_t>(4, n));
    for (int64_t s = 0; s < steps; ++s) {
        model.opt.lr = lr * (0.05 + 0.95 * 0.5 *
                             (1.0 + std::cos(M_PI * static_cast<double>(s) / steps)));
        std::vector<const TokenSample*> batch;
        for (int b = 0; b < batch_size; ++b)
            batch.push_back(&dataset[static_cast<size_t>(model.train_rng.uniform_int(0, n - 1))]);
        Stage2StepStats stats = train_step_stage2(model, stage1, batch);
        if (log && (s % 200 == 0 || s + 1 == steps)) {
            *log << "stage2 step " << s << " ce " << stats.ce << " per-scale";
            for (double c : stats.ce_per_scale) *log << ' ' << c;
            *log << "\n";
        }
    }
    return model;
}

namespace {

int32_t sample_row(const double* logits, int64_t vocab, double temperature, int top_k,
                   RngStream& rng) {
    // argmax for vanishing temperature, ties to the lowest index
    if (temperature <= 1e-6) {
        int32_t best = 0;
        for (int64_t c = 1; c < vocab; ++c)
            if (logits[c] > logits[best]) best = static_cast<int32_t>(c);
        return best;
    }
    std::vector<int64_t> order(static_cast<size_t>(vocab));
    for (int64_t i = 0; i < vocab; ++i) order[static_cast<size_t>(i)] = i;
    int64_t keep = (top_k > 0 && top_k < vocab) ? top_k : vocab;
    std::partial_sort(order.begin(), order.begin() + keep, order.end(), [&](int64_t a, int64_t b) {
        if (logits[a] != logits[b]) return logits[a] > logits[b];
        return a < b;
    });
    double mx = logits[order[0]];
    std::vector<double> probs(static_cast<size_t>(keep));
    double z = 0.0;
    for (int64_t i = 0; i < keep; ++i) {
        probs[static_cast<size_t>(i)] = std::exp((logits[order[static_cast<size_t>(i)]] - mx) / temperature);
        z += probs[static_cast<size_t>(i)];
    }
    double target = rng.uniform() * z;
    double cum = 0.0;
    for (int64_t i = 0; i < keep; ++i) {
        cum += probs[static_cast<size_t>(i)];
        if (target < cum) return static_cast<int32_t>(order[static_cast<size_t>(i)]);
    }
    return static_cast<int32_t>(order[static_cast<size_t>(keep - 1)]);
}

} // namespace

TokenMapPyramid sample_tokens(Stage2Model& model, const Stage1Model& stage1, int class_id,
                              double temperature, int top_k, uint64_t seed,
                              PriorInstrumentation* hooks) {
    require(temperature >= 0.0, "temperature must be nonnegative");
    const ScaleSchedule sched = model.cfg.schedule();
    const SequenceLayout& layout = model.net.layout();
    auto quantizer = stage1.make_quantizer();
    ScaleRefiners refiners = stage1.refiners_view();
    const int cid = class_id < 0 ? model.cfg.null_class() : class_id;
    RngStream rng = RngStream::derive(seed, "prior-sample");

    TokenMapPyramid out;
    out.vocab = model.cfg.vocab;
    for (int k = 1; k <= sched.count(); ++k) {
        const int64_t rows = layout.prefix_len(k);
        Tensor inputs = teacher_forced_inputs(out, *quantizer, sched, refiners, k);
        Tensor mask = mask_to_bias(build_block_causal_mask(layout, rows), rows);
        Graph g;
        NodePtr logits = model.net.logits(g, model.params, inputs, cid, mask, hooks);
        const int64_t vox = sched.flat_size(k);
        const int64_t first = rows - 1 - vox; // block-k rows in token-row space
        std::vector<int32_t> map(static_cast<size_t>(vox));
        for (int64_t p = 0; p < vox; ++p)
            map[static_cast<size_t>(p)] = sample_row(
                logits->value.data() + (first + p) * model.cfg.vocab, model.cfg.vocab,
                temperature, top_k, rng);
        out.maps.push_back(std::move(map));
        out.scales.push_back(sched.at(k));
    }
    out.validate_against(sched);
    return out;
}

TokenMapPyramid sample_tokens_token_by_token(Stage2Model& model, const Stage1Model& stage1,
                                             int class_id, double temperature, int top_k,
                                             uint64_t seed, PriorInstrumentation* hooks) {
    const ScaleSchedule sched = model.cfg.schedule();
    const SequenceLayout& layout = model.net.layout();
    auto quantizer = stage1.make_quantizer();
    ScaleRefiners refiners = stage1.refiners_view();
    const int cid = class_id < 0 ? model.cfg.null_class() : class_id;
    RngStream rng = RngStream::derive(seed, "prior-sample");

    TokenMapPyramid out;
    out.vocab = model.cfg.vocab;
    for (int k = 1; k <= sched.count(); ++k) {
        const int64_t vox = sched.flat_size(k);
        Tensor inputs = teacher_forced_inputs(out, *quantizer, sched, refiners, k);
        std::vector<int32_t> map;
        for (int64_t p = 0; p < vox; ++p) {
            // attend only to the start token and strictly earlier positions
            const int64_t rows = layout.prefix_len(k - 1) + p + 1;
            Tensor prefix_inputs({rows - 1, inputs.dim(1)});
            std::copy(inputs.data(), inputs.data() + (rows - 1) * inputs.dim(1),
                      prefix_inputs.data());
            std::vector<uint8_t> allowed = build_token_causal_mask(rows);
            Tensor mask = mask_to_bias(allowed, rows);
            Graph g;
            NodePtr logits = model.net.logits(g, model.params, prefix_inputs, cid, mask, hooks);
            map.push_back(sample_row(logits->value.data() + (rows - 2) * model.cfg.vocab,
                                     model.cfg.vocab, temperature, top_k, rng));
        }
        out.maps.push_back(std::move(map));
        out.scales.push_back(sched.at(k));
    }
    out.validate_against(sched);
    return out;
}

CompactWaveletVolume canonical_volume(const Stage1Config& cfg) {
    WaveletPyramid pyr;
    pyr.levels = cfg.wavelet_levels;
    pyr.base_n = cfg.grid_resolution;
    pyr.truncation = cfg.truncation;
    size_t cn = static_cast<size_t>(pyr.coarse_n());
    pyr.coarse.assign(cn * cn * cn, 0.0);
    pyr.details.resize(static_cast<size_t>(pyr.levels));
    for (int j = 1; j <= pyr.levels; ++j) {
        size_t m = static_cast<size_t>(pyr.level_n(j));
        for (auto& band : pyr.details[static_cast<size_t>(j - 1)]) band.assign(m * m * m, 0.0);
    }
    return pack(pyr, cfg.keep_levels);
}

GeneratedShape generate_shape(Stage2Model& model, const Stage1Model& stage1, int class_id,
                              double temperature, int top_k, uint64_t seed) {
    GeneratedShape shape;
    shape.tokens = sample_tokens(model, stage1, class_id, temperature, top_k, seed);
    shape.volume = stage1.reconstruct_tokens(shape.tokens, canonical_volume(stage1.cfg));

    FilterBank fb = FilterBank::make(stage1.cfg.wavelet_family);
    shape.grid = idwt3(unpack(shape.volume), fb);
    const double tau = stage1.cfg.truncation;
    for (float& v : shape.grid.values)
        v = std::clamp(v, static_cast<float>(-tau), static_cast<float>(tau));

    try {
        shape.mesh = marching_cubes(shape.grid, 0.0);
    } catch (const Error&) {
        // not fatal: counted as a failure case by callers
        shape.empty_surface = true;
    }
    return shape;
}

EmpiricalCounts measure_empirical(Stage2Model& model, const Stage1Model& stage1,
                                  SamplingMode mode, uint64_t seed) {
    PriorInstrumentation hooks;
    if (mode == SamplingMode::next_scale)
        sample_tokens(model, stage1, -1, 1.0, 0, seed, &hooks);
    else
        sample_tokens_token_by_token(model, stage1, -1, 1.0, 0, seed, &hooks);
    return {hooks.model_invocations, hooks.qk_token_pairs, hooks.qk_pairs_total};
}

} // namespace wag3d
