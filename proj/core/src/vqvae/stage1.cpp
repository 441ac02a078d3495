#include "wag3d/vqvae/stage1.hpp"

#include <cmath>
#include <ostream>

#include "wag3d/wavelet/dwt.hpp"

namespace wag3d {

using nn::Graph;
using nn::NodePtr;

ScaleSchedule Stage1Config::schedule() const { return ScaleSchedule::cubic(schedule_sides, interp); }

void Stage1Config::validate() const {
    ae.validate();
    require(grid_resolution >= 8, "grid resolution too small");
    require(wavelet_levels >= 1 && grid_resolution % (1 << wavelet_levels) == 0,
            "grid resolution ", grid_resolution, " not divisible by 2^", wavelet_levels);
    require(keep_levels >= 1 && keep_levels <= wavelet_levels, "keep_levels out of range");
    require(truncation > 0.0, "truncation must be positive");
    FilterBank::make(wavelet_family); // validates the family name

    int packed = packed_channels(wavelet_levels, keep_levels);
    require(packed == ae.in_channels, "packed wavelet channels ", packed,
            " != autoencoder in_channels ", ae.in_channels);

    ScaleSchedule sched = schedule();
    int latent = ae.latent_side(input_side());
    const auto& fin = sched.final_scale();
    require(fin[0] == latent && fin[1] == latent && fin[2] == latent,
            "schedule final scale ", sched.describe(), " != latent side ", latent);

    require(lambda_recon >= 0.0 && lambda_commit >= 0.0, "loss weights must be nonnegative");
    require(lr > 0.0, "learning rate must be positive");
    require(ema_decay > 0.0 && ema_decay < 1.0, "ema_decay must lie in (0,1)");
    require(restart_window >= 1, "restart_window must be >= 1");
    require(batch_size >= 1, "batch_size must be >= 1");

    switch (quantizer_mode) {
        case QuantizerMode::nn:
            require(vocab >= 2, "vocab must be >= 2");
            break;
        case QuantizerMode::lfq:
            require(ae.latent_channels <= 62, "LFQ needs latent_channels <= 62");
            require(vocab == (int64_t(1) << ae.latent_channels),
                    "LFQ vocab must equal 2^latent_channels");
            break;
        case QuantizerMode::fsq: {
            require(static_cast<int>(fsq_levels.size()) == ae.latent_channels,
                    "FSQ needs one level count per latent channel");
            int64_t v = 1;
            for (int l : fsq_levels) v *= l;
            require(vocab == v, "FSQ vocab must equal the product of level counts");
            break;
        }
    }
}

KvMap Stage1Config::to_kv() const {
    KvMap kv = ae.to_kv("ae.");
    kv.set_int("vocab", vocab);
    {
        std::string s;
        for (size_t i = 0; i < schedule_sides.size(); ++i)
            s += (i ? "," : "") + std::to_string(schedule_sides[i]);
        kv.set("schedule", s);
    }
    kv.set("interp", interp == InterpMode::trilinear ? "trilinear" : "nearest");
    kv.set("quantizer", quantizer_mode_name(quantizer_mode));
    if (!fsq_levels.empty()) {
        std::string s;
        for (size_t i = 0; i < fsq_levels.size(); ++i)
            s += (i ? "," : "") + std::to_string(fsq_levels[i]);
        kv.set("fsq_levels", s);
    }
    kv.set_double("lambda_recon", lambda_recon);
    kv.set_double("lambda_commit", lambda_commit);
    kv.set_double("lr", lr);
    kv.set_double("ema_decay", ema_decay);
    kv.set_int("restart_window", restart_window);
    kv.set_int("batch_size", batch_size);
    kv.set("wavelet_family", wavelet_family);
    kv.set_int("wavelet_levels", wavelet_levels);
    kv.set_int("keep_levels", keep_levels);
    kv.set_int("grid_resolution", grid_resolution);
    kv.set_double("truncation", truncation);
    return kv;
}

Stage1Config Stage1Config::from_kv(const KvMap& kv) {
    Stage1Config cfg;
    cfg.ae = AutoencoderConfig::from_kv(kv, "ae.");
    cfg.vocab = kv.get_int("vocab");
    cfg.schedule_sides = kv.get_int_list("schedule");
    cfg.interp = kv.get("interp", "trilinear") == "nearest" ? InterpMode::nearest
                                                            : InterpMode::trilinear;
    cfg.quantizer_mode = quantizer_mode_from_string(kv.get("quantizer", "nn"));
    if (kv.has("fsq_levels")) cfg.fsq_levels = kv.get_int_list("fsq_levels");
    cfg.lambda_recon = kv.get_double("lambda_recon", 1.0);
    cfg.lambda_commit = kv.get_double("lambda_commit", 0.25);
    cfg.lr = kv.get_double("lr", 1e-4);
    cfg.ema_decay = kv.get_double("ema_decay", 0.99);
    cfg.restart_window = static_cast<int>(kv.get_int("restart_window", 40));
    cfg.batch_size = static_cast<int>(kv.get_int("batch_size", 4));
    cfg.wavelet_family = kv.get("wavelet_family", "haar");
    cfg.wavelet_levels = static_cast<int>(kv.get_int("wavelet_levels"));
    cfg.keep_levels = static_cast<int>(kv.get_int("keep_levels"));
    cfg.grid_resolution = static_cast<int>(kv.get_int("grid_resolution"));
    cfg.truncation = kv.get_double("truncation", 0.1);
    cfg.validate();
    return cfg;
}

CompactWaveletVolume grid_to_volume(const DistanceGrid& grid, const Stage1Config& cfg) {
    require(grid.n == cfg.grid_resolution, "grid resolution ", grid.n,
            " != configured resolution ", cfg.grid_resolution);
    FilterBank fb = FilterBank::make(cfg.wavelet_family);
    WaveletPyramid pyr = dwt3(grid, fb, cfg.wavelet_levels);
    return pack(pyr, cfg.keep_levels);
}

Tensor volume_to_tensor(const CompactWaveletVolume& volume) {
    require(volume.h == volume.w && volume.w == volume.d,
            "stage-1 expects cubic compact volumes");
    Tensor t({volume.channels, volume.d, volume.h, volume.w});
    for (int64_t i = 0; i < t.numel(); ++i) t[i] = static_cast<double>(volume.values[static_cast<size_t>(i)]);
    return t;
}

CompactWaveletVolume tensor_to_volume(const Tensor& t, const CompactWaveletVolume& like) {
    CompactWaveletVolume out = like;
    require(t.numel() == static_cast<int64_t>(like.values.size()),
            "tensor size does not match the volume layout");
    for (int64_t i = 0; i < t.numel(); ++i) out.values[static_cast<size_t>(i)] = static_cast<float>(t[i]);
    return out;
}

Stage1Model Stage1Model::create(const Stage1Config& cfg, uint64_t seed) {
    cfg.validate();
    Stage1Model model{cfg,
                      Autoencoder(cfg.ae),
                      nn::ParamStore{},
                      nn::Adam{cfg.lr},
                      Codebook{},
                      RngStream::derive(seed, "stage1-train"),
                      0};
    RngStream init_rng = RngStream::derive(seed, "stage1-init");
    model.ae.register_params(model.params, init_rng);
    const int64_t cz = cfg.ae.latent_channels;
    for (int k = 1; k + 1 <= static_cast<int>(cfg.schedule_sides.size()); ++k) {
        model.params.ensure("rvq.refiner" + std::to_string(k) + ".w", {cz, cz, 3, 3, 3},
                            nn::identity_conv_init(&init_rng, 0.01));
        model.params.ensure("rvq.refiner" + std::to_string(k) + ".b", {cz}, nn::zeros_init());
    }
    if (cfg.quantizer_mode == QuantizerMode::nn) {
        RngStream cb_rng = RngStream::derive(seed, "stage1-codebook");
        model.codebook = Codebook::init(cfg.vocab, cz, cb_rng);
    }
    return model;
}

std::unique_ptr<Quantizer> Stage1Model::make_quantizer() const {
    switch (cfg.quantizer_mode) {
        case QuantizerMode::nn:
            return std::make_unique<NNQuantizer>(codebook);
        case QuantizerMode::lfq:
            return std::make_unique<LFQQuantizer>(cfg.ae.latent_channels);
        case QuantizerMode::fsq:
            return std::make_unique<FSQQuantizer>(cfg.fsq_levels);
    }
    fail("invalid quantizer mode");
}

ScaleRefiners Stage1Model::refiners_view() const {
    ScaleRefiners r;
    r.dim = cfg.ae.latent_channels;
    for (int k = 1; k + 1 <= static_cast<int>(cfg.schedule_sides.size()); ++k) {
        r.weight.push_back(params.at("rvq.refiner" + std::to_string(k) + ".w").value);
        r.bias.push_back(params.at("rvq.refiner" + std::to_string(k) + ".b").value);
    }
    return r;
}

Tensor Stage1Model::encode_latent(const Tensor& w) const {
    Graph g;
    auto& self = const_cast<Stage1Model&>(*this);
    NodePtr x = g.leaf(w, false);
    return self.ae.encode(g, self.params, x)->value;
}

Tensor Stage1Model::decode_latent(const Tensor& z_recon) const {
    Graph g;
    auto& self = const_cast<Stage1Model&>(*this);
    NodePtr z = g.leaf(z_recon, false);
    return self.ae.decode(g, self.params, z)->value;
}

TokenMapPyramid Stage1Model::tokenize_volume(const CompactWaveletVolume& volume) const {
    Tensor z = encode_latent(volume_to_tensor(volume));
    auto quantizer = make_quantizer();
    return encode_multiscale(z, *quantizer, cfg.schedule(), refiners_view()).tokens;
}

CompactWaveletVolume Stage1Model::reconstruct_tokens(const TokenMapPyramid& tokens,
                                                     const CompactWaveletVolume& like) const {
    auto quantizer = make_quantizer();
    Tensor z_recon = reconstruct_multiscale(tokens, *quantizer, cfg.schedule(), refiners_view());
    Tensor what = decode_latent(z_recon);
    return tensor_to_volume(what, like);
}

double Stage1Model::reconstruction_mse(const CompactWaveletVolume& volume) const {
    TokenMapPyramid tokens = tokenize_volume(volume);
    CompactWaveletVolume rec = reconstruct_tokens(tokens, volume);
    double se = 0.0;
    for (size_t i = 0; i < volume.values.size(); ++i) {
        double d = static_cast<double>(volume.values[i]) - rec.values[i];
        se += d * d;
    }
    return se / static_cast<double>(volume.values.size());
}

namespace {

struct QuantizeGraph {
    NodePtr recon;
    std::vector<NodePtr> commits;
    TokenMapPyramid tokens;
    std::vector<double> residuals;
    int64_t residual_count = 0;
};

QuantizeGraph quantize_on_graph(Graph& g, nn::ParamStore& params, NodePtr z,
                                const Quantizer& quantizer, const ScaleSchedule& sched,
                                QuantizePath path) {
    const int64_t C = z->value.dim(0);
    const auto& fin = sched.final_scale();
    const int K = sched.count();
    QuantizeGraph out;
    out.tokens.vocab = quantizer.vocab();

    NodePtr residual = z;
    NodePtr recon;
    std::vector<double> vbuf(static_cast<size_t>(C)), obuf(static_cast<size_t>(C));
    for (int k = 1; k <= K; ++k) {
        const auto& scale = sched.at(k);
        NodePtr rk = nn::resample_op(g, residual, {scale[0], scale[1], scale[2]},
                                     sched.interp == InterpMode::trilinear);
        NodePtr ek;
        if (path == QuantizePath::quantized) {
            const int64_t vox = sched.flat_size(k);
            Tensor looked(rk->value.shape());
            std::vector<int32_t> indices(static_cast<size_t>(vox));
            for (int64_t pos = 0; pos < vox; ++pos) {
                for (int64_t c = 0; c < C; ++c) vbuf[static_cast<size_t>(c)] = rk->value[c * vox + pos];
                int64_t idx = quantizer.quantize(vbuf.data());
                indices[static_cast<size_t>(pos)] = static_cast<int32_t>(idx);
                quantizer.lookup(idx, obuf.data());
                for (int64_t c = 0; c < C; ++c) looked[c * vox + pos] = obuf[static_cast<size_t>(c)];
            }
            out.tokens.maps.push_back(std::move(indices));
            out.tokens.scales.push_back(scale);
            out.residuals.insert(out.residuals.end(), rk->value.vec().begin(), rk->value.vec().end());
            out.residual_count += vox;
            ek = g.leaf(std::move(looked), false);
            out.commits.push_back(nn::l2_norm(g, nn::sub(g, rk, ek)));
        } else {
            ek = rk;
        }
        NodePtr up = nn::resample_op(g, ek, {fin[0], fin[1], fin[2]},
                                     sched.interp == InterpMode::trilinear);
        NodePtr refined = up;
        if (k < K) {
            std::string name = "rvq.refiner" + std::to_string(k);
            refined = nn::conv3d_op(g, up, params.use(g, name + ".w"), params.use(g, name + ".b"));
        }
        recon = (k == 1) ? refined : nn::add(g, recon, refined);
        if (k < K) residual = nn::sub(g, residual, refined);
    }
    out.recon = recon;
    return out;
}

} // namespace

Stage1Forward stage1_forward(Graph& g, Stage1Model& model, const Tensor& w, QuantizePath path,
                             bool straight_through) {
    NodePtr x = g.leaf(w, false);
    NodePtr z = model.ae.encode(g, model.params, x);
    auto quantizer = model.make_quantizer();
    QuantizeGraph qg =
        quantize_on_graph(g, model.params, z, *quantizer, model.cfg.schedule(), path);

    NodePtr dec_in = qg.recon;
    if (straight_through && path == QuantizePath::quantized)
        dec_in = nn::add(g, qg.recon, nn::sub(g, z, nn::detach(g, z)));
    NodePtr what = model.ae.decode(g, model.params, dec_in);

    Stage1Forward fwd;
    fwd.recon_term = nn::l2_norm(g, nn::sub(g, x, what));
    fwd.commit_term = qg.commits.empty() ? g.leaf(Tensor({1}), false)
                                         : nn::add_scalars(g, qg.commits);
    fwd.loss = nn::add_scalars(g, {nn::scale(g, fwd.recon_term, model.cfg.lambda_recon),
                                   nn::scale(g, fwd.commit_term, model.cfg.lambda_commit)});
    fwd.tokens = std::move(qg.tokens);
    fwd.residuals = std::move(qg.residuals);
    fwd.residual_count = qg.residual_count;
    return fwd;
}

Stage1LossValue stage1_loss(const Tensor& w, const Tensor& what,
                            const std::vector<ResidualPair>& pairs, double lambda_recon,
                            double lambda_commit) {
    require(w.same_shape(what), "stage1_loss shape mismatch");
    double ss = 0.0;
    for (int64_t i = 0; i < w.numel(); ++i) {
        double d = w[i] - what[i];
        ss += d * d;
    }
    double recon = std::sqrt(ss + 1e-24);
    double commit = 0.0;
    for (const auto& pr : pairs) {
        require(pr.residual.same_shape(pr.quantized), "residual pair shape mismatch");
        double s = 0.0;
        for (int64_t i = 0; i < pr.residual.numel(); ++i) {
            double d = pr.residual[i] - pr.quantized[i];
            s += d * d;
        }
        commit += std::sqrt(s + 1e-24);
    }
    return {lambda_recon * recon + lambda_commit * commit, recon, commit};
}

double codebook_usage_entropy(const Codebook& cb) {
    double total = 0.0;
    for (double u : cb.usage) total += u;
    if (total <= 0.0) return 0.0;
    double h = 0.0;
    for (double u : cb.usage) {
        if (u <= 0.0) continue;
        double p = u / total;
        h -= p * std::log(p);
    }
    return h;
}

Stage1StepStats train_step_stage1(Stage1Model& model,
                                  const std::vector<const CompactWaveletVolume*>& batch) {
    require(!batch.empty(), "empty stage-1 batch");
    model.params.begin_step();
    Graph g;
    std::vector<NodePtr> losses, recons, commits;
    std::vector<double> residuals;
    int64_t residual_count = 0;
    for (const auto* vol : batch) {
        Stage1Forward fwd =
            stage1_forward(g, model, volume_to_tensor(*vol), QuantizePath::quantized, true);
        losses.push_back(fwd.loss);
        recons.push_back(fwd.recon_term);
        commits.push_back(fwd.commit_term);
        residuals.insert(residuals.end(), fwd.residuals.begin(), fwd.residuals.end());
        residual_count += fwd.residual_count;
    }
    const double invb = 1.0 / static_cast<double>(batch.size());
    NodePtr loss = nn::scale(g, nn::add_scalars(g, losses), invb);
    require(std::isfinite(loss->value[0]),
            "stage-1 training diverged (non-finite loss) at step ", model.step);
    g.backward(loss);
    model.params.collect_grads();
    model.opt.step(model.params);

    if (model.cfg.quantizer_mode == QuantizerMode::nn)
        codebook_update(model.codebook, residuals, residual_count, model.cfg.ema_decay,
                        model.cfg.restart_window, model.train_rng);

    ++model.step;
    double recon = 0.0, commit = 0.0;
    for (const auto& r : recons) recon += r->value[0] * invb;
    for (const auto& c : commits) commit += c->value[0] * invb;
    return {loss->value[0], recon, commit, codebook_usage_entropy(model.codebook)};
}

Stage1Model train_stage1(const std::vector<CompactWaveletVolume>& dataset,
                         const Stage1Config& cfg, int64_t steps, uint64_t seed,
                         std::ostream* log, const Stage1Observer& observer) {
    require(!dataset.empty(), "stage-1 dataset is empty");
    Stage1Model model = Stage1Model::create(cfg, seed);
    const int64_t n = static_cast<int64_t>(dataset.size());
    for (int64_t s = 0; s < steps; ++s) {
        // cosine decay to 5%: the norm-shaped losses keep full-size gradients
        // near the optimum, so a fixed step size leaves a noise floor
        model.opt.lr = cfg.lr * (0.05 + 0.95 * 0.5 *
                                 (1.0 + std::cos(M_PI * static_cast<double>(s) / steps)));
        std::vector<const CompactWaveletVolume*> batch;
        for (int b = 0; b < cfg.batch_size; ++b)
            batch.push_back(&dataset[static_cast<size_t>(model.train_rng.uniform_int(0, n - 1))]);
        Stage1StepStats stats = train_step_stage1(model, batch);
        if (observer) observer(s, stats);
        if (log && (s % 100 == 0 || s + 1 == steps))
            *log << "stage1 step " << s << " loss " << stats.loss << " recon " << stats.recon
                 << " commit " << stats.commit << " usage-entropy " << stats.usage_entropy
                 << "\n";
    }
    return model;
}

void Stage1Model::save(const std::string& path) const {
    nn::Checkpoint ck;
    for (const auto& [name, p] : params.all()) {
        ck.put_tensor("param/" + name, p.value);
        ck.put_tensor("adam_m/" + name, p.m);
        ck.put_tensor("adam_v/" + name, p.v);
    }
    if (cfg.quantizer_mode == QuantizerMode::nn) {
        ck.put_tensor("codebook/vectors", codebook.vectors);
        ck.put_f64_array("codebook/usage", codebook.usage);
        ck.put_f64_array("codebook/ema_weight", codebook.ema_weight);
        std::vector<double> idle(codebook.idle_steps.begin(), codebook.idle_steps.end());
        ck.put_f64_array("codebook/idle", idle);
    }
    ck.put_string("config", cfg.to_kv().serialize());
    ck.put_string("rng_state", train_rng.state());
    ck.put_i64("step", step);
    ck.put_i64("adam_steps", opt.step_count);
    ck.put_string("kind", "stage1");
    ck.save(path);
}

Stage1Model Stage1Model::load(const std::string& path) {
    nn::Checkpoint ck = nn::Checkpoint::load(path);
    require(ck.get_string("kind") == "stage1", path, " is not a stage-1 checkpoint");
    Stage1Config cfg = Stage1Config::from_kv(KvMap::parse(ck.get_string("config")));
    Stage1Model model = Stage1Model::create(cfg, 0);
    for (auto& [name, p] : model.params.all()) {
        p.value = ck.get_tensor("param/" + name);
        p.m = ck.get_tensor("adam_m/" + name);
        p.v = ck.get_tensor("adam_v/" + name);
    }
    if (cfg.quantizer_mode == QuantizerMode::nn) {
        model.codebook.vectors = ck.get_tensor("codebook/vectors");
        model.codebook.usage = ck.get_f64_array("codebook/usage");
        model.codebook.ema_weight = ck.get_f64_array("codebook/ema_weight");
        std::vector<double> idle = ck.get_f64_array("codebook/idle");
        model.codebook.idle_steps.assign(idle.begin(), idle.end());
    }
    model.train_rng.set_state(ck.get_string("rng_state"));
    model.step = ck.get_i64("step");
    model.opt.step_count = ck.get_i64("adam_steps");
    return model;
}

} // namespace wag3d
