#include "wag3d/pipeline/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "wag3d/bench/complexity.hpp"
#include "wag3d/geometry/sample_points.hpp"
#include "wag3d/metrics/pointcloud_metrics.hpp"
#include "wag3d/pipeline/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

namespace fs = std::filesystem;

namespace wag3d {

namespace {

uint64_t env_seed_override(uint64_t seed) {
    if (const char* env = std::getenv("WAG3D_SEED")) {
        try {
            return static_cast<uint64_t>(std::stoull(env));
        } catch (const std::exception&) {
            fail("WAG3D_SEED is not an integer: ", env);
        }
    }
    return seed;
}

void cmd_gen_data(const std::string& kinds_csv, int count, int res, double tau, uint64_t seed,
                  const std::string& label_mode, const std::string& out) {
    DataSpec spec;
    std::istringstream is(kinds_csv);
    std::string item;
    while (std::getline(is, item, ','))
        if (!item.empty()) spec.kinds.push_back(item);
    spec.count = count;
    spec.resolution = res;
    spec.tau = tau;
    spec.seed = seed;
    spec.label_mode = label_mode;
    generate_dataset(spec, out);
    std::cout << "wrote " << count << " grids to " << out << "\n";
}

void cmd_roundtrip(const std::string& in, const std::string& family, int levels, int keep) {
    DistanceGrid grid = load_w3dg(in);
    FilterBank fb = FilterBank::make(family);
    WaveletPyramid pyr = dwt3(grid, fb, levels);
    CompactWaveletVolume vol = pack(pyr, keep);
    WaveletPyramid back = unpack(vol);
    DistanceGrid rec = idwt3(back, fb);

    double max_err = 0.0;
    for (size_t i = 0; i < grid.values.size(); ++i)
        max_err = std::max(max_err, std::abs(static_cast<double>(grid.values[i]) - rec.values[i]));

    double grid_energy = 0.0;
    for (float v : grid.values) grid_energy += static_cast<double>(v) * v;
    double kept_energy = 0.0;
    for (float v : vol.values) kept_energy += static_cast<double>(v) * v;
    double pyramid_energy = pyr.energy();

    std::cout << "grid " << in << " n=" << grid.n << " tau=" << grid.truncation << "\n"
              << "filters " << fb.name() << " levels=" << levels << " keep=" << keep
              << " channels=" << vol.channels << " at " << vol.h << "^3\n"
              << "max |reconstruction error| = " << max_err << "\n"
              << "grid energy = " << grid_energy << "\n"
              << "pyramid energy = " << pyramid_energy << "\n"
              << "kept coefficient energy = " << kept_energy << " ("
              << (pyramid_energy > 0 ? 100.0 * kept_energy / pyramid_energy : 100.0)
              << "% of pyramid)\n";
}

void cmd_train_vqvae(const std::string& config_path, const std::string& data_dir, int64_t steps,
                     uint64_t seed, const std::string& out) {
    ExperimentConfig cfg = ExperimentConfig::load(config_path);
    seed = env_seed_override(seed);
    std::vector<DatasetEntry> entries = read_index(data_dir);
    std::vector<CompactWaveletVolume> volumes = load_volumes(data_dir, entries, cfg.stage1);
    Stage1Model model = train_stage1(volumes, cfg.stage1, steps > 0 ? steps : cfg.stage1_steps,
                                     seed, &std::cout);
    model.save(out);
    std::cout << "stage-1 checkpoint written to " << out << "\n";
}

void cmd_tokenize(const std::string& vqvae, const std::string& data_dir,
                  const std::string& out) {
    Stage1Model stage1 = Stage1Model::load(vqvae);
    tokenize_dataset(data_dir, stage1, out);
    std::cout << "tokens written to " << out << "\n";
}

void cmd_train_prior(const std::string& vqvae, const std::string& tokens_dir,
                     const std::string& config_path, int64_t steps, uint64_t seed,
                     const std::string& out) {
    ExperimentConfig cfg = ExperimentConfig::load(config_path);
    seed = env_seed_override(seed);
    Stage1Model stage1 = Stage1Model::load(vqvae);
    uint64_t stage1_hash = nn::Checkpoint::file_hash(vqvae);
    std::vector<TokenSample> dataset;
    for (const auto& e : read_index(tokens_dir)) {
        TokenMapPyramid pyr = load_w3tp((fs::path(tokens_dir) / e.file).string());
        dataset.push_back({std::move(pyr), e.class_id});
    }
    Stage2Model model = train_stage2(dataset, stage1, cfg.stage2, cfg.stage2_lr,
                                     steps > 0 ? steps : cfg.stage2_steps, seed, stage1_hash,
                                     &std::cout);
    model.save(out);
    std::cout << "stage-2 checkpoint written to " << out << "\n";
}

void cmd_generate(const std::string& vqvae, const std::string& prior, int class_id, int count,
                  double temp, int topk, uint64_t seed, const std::string& out) {
    Stage1Model stage1 = Stage1Model::load(vqvae);
    Stage2Model stage2 = Stage2Model::load(prior);
    require(stage2.stage1_hash == nn::Checkpoint::file_hash(vqvae),
            "stage-1 checkpoint does not match the hash recorded in the prior checkpoint");
    seed = env_seed_override(seed);
    fs::create_directories(out);
    int empty = 0;
    for (int i = 0; i < count; ++i) {
        GeneratedShape shape =
            generate_shape(stage2, stage1, class_id, temp, topk, seed + static_cast<uint64_t>(i));
        char name[64];
        std::snprintf(name, sizeof(name), "sample_%04d", i);
        save_w3tp((fs::path(out) / (std::string(name) + ".w3tp")).string(), shape.tokens);
        if (shape.mesh) {
            save_obj((fs::path(out) / (std::string(name) + ".obj")).string(), *shape.mesh);
        } else {
            ++empty;
            std::cout << "sample " << i << ": empty iso-surface (no mesh written)\n";
        }
    }
    std::cout << "generated " << count - empty << " meshes (" << empty
              << " empty iso-surfaces) in " << out << "\n";
}

std::vector<PointCloud> sample_dir_clouds(const std::string& dir, int points, uint64_t seed,
                                          const char* tag) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".obj") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    require(!files.empty(), "no .obj meshes in ", dir);
    std::vector<PointCloud> clouds;
    for (size_t i = 0; i < files.size(); ++i) {
        TriangleMesh mesh = load_obj(files[i].string());
        clouds.push_back(sample_surface_points(mesh, points, RngStream::mix(seed, tag) + i));
    }
    return clouds;
}

void cmd_evaluate(const std::string& gen_dir, const std::string& ref_dir, int points,
                  uint64_t seed, const std::string& report_path) {
    seed = env_seed_override(seed);
    std::vector<PointCloud> gen = sample_dir_clouds(gen_dir, points, seed, "eval-gen");
    std::vector<PointCloud> ref = sample_dir_clouds(ref_dir, points, seed, "eval-ref");
    MetricReport report = evaluate_sets(gen, ref, seed);
    std::ofstream os(report_path);
    require(os.good(), "cannot write ", report_path);
    os << report.to_json() << "\n";
    std::cout << report.to_json() << "\n";
}

void cmd_bench(const std::string& mode, int64_t a, int64_t nmax, const std::string& report_path,
               const std::string& vqvae, const std::string& prior) {
    nlohmann::ordered_json j;
    j["mode"] = mode;
    if (mode == "analytic") {
        using bench::fitted_exponent;
        std::vector<std::pair<double, mpz_class>> naive_pts, wag_pts;
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (int64_t n = 4; n <= nmax; n *= 2) {
            auto model = bench::ComplexityModel::from_resolution(n, a);
            mpz_class naive = bench::naive_ar_cost(n);
            mpz_class wag = bench::wag_total_cost(a, model.steps);
            naive_pts.push_back({static_cast<double>(n), naive});
            wag_pts.push_back({static_cast<double>(n), wag});
            nlohmann::ordered_json row;
            row["n"] = n;
            row["naive_ar_cost"] = naive.get_str();
            row["wag_total_cost"] = wag.get_str();
            rows.push_back(row);
        }
        j["rows"] = rows;
        j["naive_exponent"] = fitted_exponent(naive_pts);
        j["wag_exponent"] = fitted_exponent(wag_pts);
    } else if (mode == "empirical") {
        require(!vqvae.empty() && !prior.empty(), "empirical mode needs --vqvae and --prior");
        Stage1Model stage1 = Stage1Model::load(vqvae);
        Stage2Model stage2 = Stage2Model::load(prior);
        EmpiricalCounts next = measure_empirical(stage2, stage1, SamplingMode::next_scale, 1);
        EmpiricalCounts naive = measure_empirical(stage2, stage1, SamplingMode::token_by_token, 1);
        std::vector<int64_t> sizes;
        ScaleSchedule sched = stage2.cfg.schedule();
        for (int k = 1; k <= sched.count(); ++k) sizes.push_back(sched.flat_size(k));
        j["schedule_pair_count"] = bench::schedule_pair_count(sizes).get_str();
        j["next_scale"] = {{"steps", next.steps},
                           {"attention_pairs", next.attention_pairs},
                           {"attention_pairs_total", next.attention_pairs_total}};
        j["token_by_token"] = {{"steps", naive.steps},
                               {"attention_pairs", naive.attention_pairs},
                               {"attention_pairs_total", naive.attention_pairs_total}};
    } else {
        fail("unknown bench mode '", mode, "' (expected analytic or empirical)");
    }
    if (!report_path.empty()) {
        std::ofstream os(report_path);
        require(os.good(), "cannot write ", report_path);
        os << j.dump(2) << "\n";
    }
    std::cout << j.dump(2) << "\n";
}

} // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"hierarchical wavelet-guided autoregressive 3D shape generation"};
    app.require_subcommand(1);

    // gen-data
    std::string gd_kinds = "sphere,box", gd_label = "instance", gd_out;
    int gd_count = 8, gd_res = 32;
    double gd_tau = 0.1;
    uint64_t gd_seed = 7;
    auto* gen_data = app.add_subcommand("gen-data", "generate a procedural SDF dataset");
    gen_data->add_option("--kinds", gd_kinds, "comma-separated primitive kinds");
    gen_data->add_option("--count", gd_count)->required();
    gen_data->add_option("--res", gd_res, "grid resolution");
    gen_data->add_option("--tau", gd_tau, "truncation band");
    gen_data->add_option("--seed", gd_seed);
    gen_data->add_option("--label-mode", gd_label, "instance or kind");
    gen_data->add_option("--out", gd_out)->required();

    // roundtrip
    std::string rt_in, rt_family = "haar";
    int rt_levels = 2, rt_keep = 2;
    auto* roundtrip = app.add_subcommand("roundtrip", "wavelet pack/unpack round trip report");
    roundtrip->add_option("--in", rt_in)->required();
    roundtrip->add_option("--filters", rt_family, "haar or bior5_3");
    roundtrip->add_option("--levels", rt_levels);
    roundtrip->add_option("--keep", rt_keep);

    // train-vqvae
    std::string tv_config, tv_data, tv_out;
    int64_t tv_steps = 0;
    uint64_t tv_seed = 7;
    auto* train_vqvae = app.add_subcommand("train-vqvae", "train the stage-1 autoencoder");
    train_vqvae->add_option("--config", tv_config)->required();
    train_vqvae->add_option("--data", tv_data)->required();
    train_vqvae->add_option("--steps", tv_steps, "override config step count");
    train_vqvae->add_option("--seed", tv_seed);
    train_vqvae->add_option("--out", tv_out)->required();

    // tokenize
    std::string tk_vqvae, tk_data, tk_out;
    auto* tokenize = app.add_subcommand("tokenize", "encode a grid dataset to token pyramids");
    tokenize->add_option("--vqvae", tk_vqvae)->required();
    tokenize->add_option("--data", tk_data)->required();
    tokenize->add_option("--out", tk_out)->required();

    // train-prior
    std::string tp_vqvae, tp_data, tp_config, tp_out;
    int64_t tp_steps = 0;
    uint64_t tp_seed = 7;
    auto* train_prior = app.add_subcommand("train-prior", "train the stage-2 prior");
    train_prior->add_option("--vqvae", tp_vqvae)->required();
    train_prior->add_option("--data", tp_data)->required();
    train_prior->add_option("--config", tp_config)->required();
    train_prior->add_option("--steps", tp_steps, "override config step count");
    train_prior->add_option("--seed", tp_seed);
    train_prior->add_option("--out", tp_out)->required();

    // generate
    std::string gn_vqvae, gn_prior, gn_out;
    int gn_class = -1, gn_count = 4, gn_topk = 64;
    double gn_temp = 1.0;
    uint64_t gn_seed = 7;
    auto* generate = app.add_subcommand("generate", "sample shapes from trained checkpoints");
    generate->add_option("--vqvae", gn_vqvae)->required();
    generate->add_option("--prior", gn_prior)->required();
    generate->add_option("--class-id", gn_class, "-1 for unconditional (null class)");
    generate->add_option("--count", gn_count);
    generate->add_option("--temp", gn_temp);
    generate->add_option("--topk", gn_topk);
    generate->add_option("--seed", gn_seed);
    generate->add_option("--out", gn_out)->required();

    // evaluate
    std::string ev_gen, ev_ref, ev_report = "report.json";
    int ev_points = 2048;
    uint64_t ev_seed = 7;
    auto* evaluate = app.add_subcommand("evaluate", "COV/MMD/1-NNA between mesh directories");
    evaluate->add_option("--gen", ev_gen)->required();
    evaluate->add_option("--ref", ev_ref)->required();
    evaluate->add_option("--points", ev_points);
    evaluate->add_option("--seed", ev_seed);
    evaluate->add_option("--report", ev_report);

    // bench
    std::string bn_mode = "analytic", bn_report, bn_vqvae, bn_prior;
    int64_t bn_a = 2, bn_nmax = 64;
    auto* bench_cmd = app.add_subcommand("bench", "complexity accounting");
    bench_cmd->add_option("--mode", bn_mode, "analytic or empirical");
    bench_cmd->add_option("--a", bn_a, "growth base");
    bench_cmd->add_option("--nmax", bn_nmax);
    bench_cmd->add_option("--report", bn_report);
    bench_cmd->add_option("--vqvae", bn_vqvae);
    bench_cmd->add_option("--prior", bn_prior);

    // run
    std::string rn_config, rn_out;
    auto* run = app.add_subcommand("run", "full pipeline from one config");
    run->add_option("--config", rn_config)->required();
    run->add_option("--out", rn_out)->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (gen_data->parsed())
            cmd_gen_data(gd_kinds, gd_count, gd_res, gd_tau, env_seed_override(gd_seed),
                         gd_label, gd_out);
        else if (roundtrip->parsed())
            cmd_roundtrip(rt_in, rt_family, rt_levels, rt_keep);
        else if (train_vqvae->parsed())
            cmd_train_vqvae(tv_config, tv_data, tv_steps, tv_seed, tv_out);
        else if (tokenize->parsed())
            cmd_tokenize(tk_vqvae, tk_data, tk_out);
        else if (train_prior->parsed())
            cmd_train_prior(tp_vqvae, tp_data, tp_config, tp_steps, tp_seed, tp_out);
        else if (generate->parsed())
            cmd_generate(gn_vqvae, gn_prior, gn_class, gn_count, gn_temp, gn_topk, gn_seed,
                         gn_out);
        else if (evaluate->parsed())
            cmd_evaluate(ev_gen, ev_ref, ev_points, ev_seed, ev_report);
        else if (bench_cmd->parsed())
            cmd_bench(bn_mode, bn_a, bn_nmax, bn_report, bn_vqvae, bn_prior);
        else if (run->parsed()) {
            ExperimentConfig cfg = ExperimentConfig::load(rn_config);
            run_experiment(cfg, rn_out, &std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace wag3d
