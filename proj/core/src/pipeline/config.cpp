#include "wag3d/pipeline/config.hpp"

#include "wag3d/geometry/sdf.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace wag3d {

void ExperimentConfig::validate() const {
    require(!kinds.empty(), "data.kinds must list at least one primitive");
    for (const auto& k : kinds) primitive_kind_from_string(k);
    require(count >= 1, "data.count must be positive");
    require(label_mode == "instance" || label_mode == "kind",
            "data.label_mode must be instance or kind");
    if (label_mode == "kind")
        require(count % static_cast<int>(kinds.size()) == 0,
                "data.count must be a multiple of the kind count in kind mode");
    require(resolution == stage1.grid_resolution,
            "data.resolution != stage1 grid_resolution");
    require(tau == stage1.truncation, "data.tau != stage1 truncation");
    stage1.validate();
    stage2.validate();
    require(stage2.vocab == stage1.vocab, "stage2 vocab must equal stage1 vocab");
    require(stage2.schedule_sides == stage1.schedule_sides,
            "stage2 schedule must equal stage1 schedule");
    require(stage2.latent_dim == stage1.ae.latent_channels,
            "stage2 latent_dim must equal stage1 latent_channels");
    require(stage2.num_classes == num_classes(), "stage2 num_classes must match the dataset (",
            num_classes(), " under label_mode=", label_mode, ")");
    require(stage1_steps >= 1 && stage2_steps >= 1, "step counts must be positive");
    require(temperature >= 0.0, "sampling temperature must be nonnegative");
    require(eval_points >= 8, "eval.points too small");
    require(eval_gen_count >= 1, "eval.gen_count must be positive");
}

KvMap ExperimentConfig::to_kv() const {
    KvMap kv;
    {
        std::string s;
        for (size_t i = 0; i < kinds.size(); ++i) s += (i ? "," : "") + kinds[i];
        kv.set("data.kinds", s);
    }
    kv.set_int("data.count", count);
    kv.set_int("data.resolution", resolution);
    kv.set_double("data.tau", tau);
    kv.set_int("data.seed", static_cast<int64_t>(seed));
    kv.set("data.label_mode", label_mode);

    KvMap s1 = stage1.to_kv();
    for (const auto& [k, v] : s1.values) {
        // the wavelet block gets its own section name for readability
        if (k == "wavelet_family") kv.set("wavelet.family", v);
        else if (k == "wavelet_levels") kv.set("wavelet.levels", v);
        else if (k == "keep_levels") kv.set("wavelet.keep_levels", v);
        else if (k == "grid_resolution" || k == "truncation" || k == "ae.in_channels") continue;
        else kv.set("stage1." + k, v);
    }
    kv.set_int("stage1.steps", stage1_steps);

    kv.set_int("stage2.width", stage2.width);
    kv.set_int("stage2.depth", stage2.depth);
    kv.set_int("stage2.heads", stage2.heads);
    kv.set_double("stage2.label_dropout", stage2.label_dropout);
    kv.set_double("stage2.qk_scale_init", stage2.qk_scale_init);
    kv.set_double("stage2.lr", stage2_lr);
    kv.set_int("stage2.steps", stage2_steps);
    kv.set_double("stage2.temperature", temperature);
    kv.set_int("stage2.top_k", top_k);

    kv.set_int("eval.points", eval_points);
    kv.set_int("eval.gen_count", eval_gen_count);
    return kv;
}

ExperimentConfig ExperimentConfig::from_kv(const KvMap& kv) {
    ExperimentConfig cfg;
    cfg.kinds = kv.get_list("data.kinds");
    cfg.count = static_cast<int>(kv.get_int("data.count"));
    cfg.resolution = static_cast<int>(kv.get_int("data.resolution"));
    cfg.tau = kv.get_double("data.tau", 0.1);
    cfg.seed = static_cast<uint64_t>(kv.get_int("data.seed", 7));
    cfg.label_mode = kv.get("data.label_mode", "instance");

    Stage1Config s1;
    s1.wavelet_family = kv.get("wavelet.family", "haar");
    s1.wavelet_levels = static_cast<int>(kv.get_int("wavelet.levels", 2));
    s1.keep_levels = static_cast<int>(kv.get_int("wavelet.keep_levels", 1));
    s1.grid_resolution = cfg.resolution;
    s1.truncation = cfg.tau;
    s1.ae.in_channels = packed_channels(s1.wavelet_levels, s1.keep_levels);
    s1.ae.base_channels = static_cast<int>(kv.get_int("stage1.ae.base_channels", 16));
    s1.ae.downsample_levels = static_cast<int>(kv.get_int("stage1.ae.downsample_levels", 2));
    s1.ae.latent_channels = static_cast<int>(kv.get_int("stage1.ae.latent_channels", 8));
    s1.ae.mid_attention = kv.get_bool("stage1.ae.mid_attention", true);
    s1.ae.gn_groups = static_cast<int>(kv.get_int("stage1.ae.gn_groups", 8));
    s1.ae.gn_eps = kv.get_double("stage1.ae.gn_eps", 1e-6);
    s1.vocab = kv.get_int("stage1.vocab", 128);
    if (kv.has("stage1.schedule")) s1.schedule_sides = kv.get_int_list("stage1.schedule");
    s1.interp = kv.get("stage1.interp", "trilinear") == "nearest" ? InterpMode::nearest
                                                                  : InterpMode::trilinear;
    s1.quantizer_mode = quantizer_mode_from_string(kv.get("stage1.quantizer", "nn"));
    if (kv.has("stage1.fsq_levels")) s1.fsq_levels = kv.get_int_list("stage1.fsq_levels");
    s1.lambda_recon = kv.get_double("stage1.lambda_recon", 1.0);
    s1.lambda_commit = kv.get_double("stage1.lambda_commit", 0.25);
    s1.lr = kv.get_double("stage1.lr", 1e-4);
    s1.ema_decay = kv.get_double("stage1.ema_decay", 0.99);
    s1.restart_window = static_cast<int>(kv.get_int("stage1.restart_window", 40));
    s1.batch_size = static_cast<int>(kv.get_int("stage1.batch_size", 4));
    cfg.stage1 = s1;
    cfg.stage1_steps = kv.get_int("stage1.steps", 2000);

    PriorConfig s2;
    s2.width = static_cast<int>(kv.get_int("stage2.width", 128));
    s2.depth = static_cast<int>(kv.get_int("stage2.depth", 4));
    s2.heads = static_cast<int>(kv.get_int("stage2.heads", 4));
    s2.vocab = s1.vocab;
    s2.num_classes = cfg.num_classes();
    s2.latent_dim = s1.ae.latent_channels;
    s2.schedule_sides = s1.schedule_sides;
    s2.interp = s1.interp;
    s2.label_dropout = kv.get_double("stage2.label_dropout", 0.1);
    s2.qk_scale_init = kv.get_double("stage2.qk_scale_init", 10.0);
    cfg.stage2 = s2;
    cfg.stage2_lr = kv.get_double("stage2.lr", 1e-3);
    cfg.stage2_steps = kv.get_int("stage2.steps", 5000);
    cfg.temperature = kv.get_double("stage2.temperature", 1.0);
    cfg.top_k = static_cast<int>(kv.get_int("stage2.top_k", 64));

    cfg.eval_points = static_cast<int>(kv.get_int("eval.points", 256));
    cfg.eval_gen_count = static_cast<int>(kv.get_int("eval.gen_count", 16));

    if (const char* env = std::getenv("WAG3D_SEED")) {
        try {
            cfg.seed = static_cast<uint64_t>(std::stoull(env));
        } catch (const std::exception&) {
            fail("WAG3D_SEED is not an integer: ", env);
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream is(path);
    require(is.good(), "cannot open config ", path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return from_kv(KvMap::parse(ss.str()));
}

} // namespace wag3d
