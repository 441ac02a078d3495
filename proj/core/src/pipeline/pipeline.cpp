#include "wag3d/pipeline/pipeline.hpp"

#include "wag3d/geometry/sdf.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>

#include "wag3d/geometry/sample_points.hpp"
#include "wag3d/metrics/pointcloud_metrics.hpp"

#include <json.hpp>

namespace fs = std::filesystem;

namespace wag3d {

void write_index(const std::string& dir, const std::vector<DatasetEntry>& entries) {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& e : entries) {
        nlohmann::ordered_json item;
        item["file"] = e.file;
        item["class_id"] = e.class_id;
        item["kind"] = e.kind;
        j.push_back(item);
    }
    std::ofstream os(fs::path(dir) / "index.json");
    require(os.good(), "cannot write index in ", dir);
    os << j.dump(2) << "\n";
}

std::vector<DatasetEntry> read_index(const std::string& dir) {
    std::ifstream is(fs::path(dir) / "index.json");
    require(is.good(), "no index.json in ", dir);
    nlohmann::json j = nlohmann::json::parse(is);
    std::vector<DatasetEntry> entries;
    for (const auto& item : j) {
        entries.push_back({item.at("file").get<std::string>(), item.at("class_id").get<int>(),
                           item.value("kind", std::string())});
    }
    require(!entries.empty(), "empty index in ", dir);
    return entries;
}

void DataSpec::validate() const {
    require(!kinds.empty(), "data.kinds must list at least one primitive");
    for (const auto& k : kinds) primitive_kind_from_string(k);
    require(count >= 1, "data.count must be positive");
    require(resolution >= 8, "data.resolution must be >= 8");
    require(tau > 0.0, "data.tau must be positive");
    require(label_mode == "instance" || label_mode == "kind",
            "data.label_mode must be instance or kind");
}

std::vector<DatasetEntry> generate_dataset(const DataSpec& spec, const std::string& out_dir) {
    spec.validate();
    fs::create_directories(out_dir);
    RngStream rng = RngStream::derive(spec.seed, "gen-data");
    std::vector<DatasetEntry> entries;
    for (int i = 0; i < spec.count; ++i) {
        const std::string& kind_name = spec.kinds[static_cast<size_t>(i) % spec.kinds.size()];
        PrimitiveKind kind = primitive_kind_from_string(kind_name);
        int class_id = spec.label_mode == "instance"
                           ? i
                           : static_cast<int>(static_cast<size_t>(i) % spec.kinds.size());
        ProceduralSpec pspec = ProceduralSpec::sample(kind, class_id, rng);
        DistanceGrid grid = procedural_sdf(pspec, spec.resolution, spec.tau);
        char name[64];
        std::snprintf(name, sizeof(name), "shape_%04d.w3dg", i);
        save_w3dg((fs::path(out_dir) / name).string(), grid);
        entries.push_back({name, class_id, kind_name});
    }
    write_index(out_dir, entries);
    return entries;
}

std::vector<CompactWaveletVolume> load_volumes(const std::string& grids_dir,
                                               const std::vector<DatasetEntry>& entries,
                                               const Stage1Config& cfg) {
    std::vector<CompactWaveletVolume> volumes;
    for (const auto& e : entries) {
        DistanceGrid grid = load_w3dg((fs::path(grids_dir) / e.file).string());
        volumes.push_back(grid_to_volume(grid, cfg));
    }
    return volumes;
}

void tokenize_dataset(const std::string& grids_dir, const Stage1Model& stage1,
                      const std::string& tokens_dir) {
    std::vector<DatasetEntry> entries = read_index(grids_dir);
    fs::create_directories(tokens_dir);
    std::vector<DatasetEntry> token_entries;
    for (const auto& e : entries) {
        DistanceGrid grid = load_w3dg((fs::path(grids_dir) / e.file).string());
        CompactWaveletVolume vol = grid_to_volume(grid, stage1.cfg);
        TokenMapPyramid tokens = stage1.tokenize_volume(vol);
        std::string name = fs::path(e.file).stem().string() + ".w3tp";
        save_w3tp((fs::path(tokens_dir) / name).string(), tokens);
        token_entries.push_back({name, e.class_id, e.kind});
    }
    write_index(tokens_dir, token_entries);
}

namespace {

// exclusive ownership of a run directory for the duration of the run
struct DirLock {
    fs::path path;
    explicit DirLock(const fs::path& dir) : path(dir / ".wag3d.lock") {
        require(!fs::exists(path), "run directory ", dir.string(),
                " is locked by another run (remove ", path.string(), " if stale)");
        std::ofstream os(path);
        require(os.good(), "cannot create lock file ", path.string());
        os << "locked\n";
    }
    ~DirLock() {
        std::error_code ec;
        fs::remove(path, ec);
    }
};

std::vector<TokenSample> load_token_dataset(const std::string& tokens_dir,
                                            const ScaleSchedule& schedule) {
    std::vector<TokenSample> dataset;
    for (const auto& e : read_index(tokens_dir)) {
        TokenMapPyramid pyr = load_w3tp((fs::path(tokens_dir) / e.file).string());
        pyr.validate_against(schedule);
        dataset.push_back({std::move(pyr), e.class_id});
    }
    return dataset;
}

} // namespace

RunManifest run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                           std::ostream* log) {
    cfg.validate();
    fs::create_directories(out_dir);
    DirLock lock{fs::path(out_dir)};

    RunManifest manifest;
    manifest.config_text = cfg.to_kv().serialize();
    manifest.config_hash = cfg.to_kv().hash();
    manifest.seed = cfg.seed;

    auto stage = [&](const char* name, auto&& fn) {
        if (log) *log << "[run] stage " << name << "\n";
        try {
            fn();
        } catch (const std::exception& e) {
            fail("stage '", name, "' failed: ", e.what(),
                 " (partial artifacts preserved in ", out_dir, ")");
        }
    };

    const std::string data_dir = (fs::path(out_dir) / "data").string();
    const std::string tokens_dir = (fs::path(out_dir) / "tokens").string();
    const std::string samples_dir = (fs::path(out_dir) / "samples").string();
    const std::string stage1_path = (fs::path(out_dir) / "stage1.w3ck").string();
    const std::string stage2_path = (fs::path(out_dir) / "stage2.w3ck").string();
    const std::string report_path = (fs::path(out_dir) / "report.json").string();

    std::vector<DatasetEntry> entries;
    stage("gen-data", [&] { entries = generate_dataset(DataSpec::from_config(cfg), data_dir); });

    stage("train-vqvae", [&] {
        std::vector<CompactWaveletVolume> volumes = load_volumes(data_dir, entries, cfg.stage1);
        Stage1Model stage1 = train_stage1(volumes, cfg.stage1, cfg.stage1_steps, cfg.seed, log);
        stage1.save(stage1_path);
    });
    manifest.add_artifact("stage1_checkpoint", stage1_path);

    Stage1Model stage1 = Stage1Model::load(stage1_path);
    const uint64_t stage1_hash = nn::Checkpoint::file_hash(stage1_path);

    stage("tokenize", [&] { tokenize_dataset(data_dir, stage1, tokens_dir); });

    stage("train-prior", [&] {
        std::vector<TokenSample> dataset = load_token_dataset(tokens_dir, stage1.cfg.schedule());
        Stage2Model stage2 = train_stage2(dataset, stage1, cfg.stage2, cfg.stage2_lr,
                                          cfg.stage2_steps, cfg.seed, stage1_hash, log);
        stage2.save(stage2_path);
    });
    manifest.add_artifact("stage2_checkpoint", stage2_path);

    int empty_surfaces = 0;
    stage("generate", [&] {
        Stage2Model stage2 = Stage2Model::load(stage2_path);
        require(stage2.stage1_hash == stage1_hash,
                "stage-1 checkpoint does not match the hash recorded in the prior");
        fs::create_directories(samples_dir);
        for (int i = 0; i < cfg.eval_gen_count; ++i) {
            int class_id = cfg.num_classes() > 0 ? i % cfg.num_classes() : -1;
            GeneratedShape shape = generate_shape(stage2, stage1, class_id, cfg.temperature,
                                                  cfg.top_k, cfg.seed + 1000 + static_cast<uint64_t>(i));
            char name[64];
            std::snprintf(name, sizeof(name), "sample_%04d", i);
            save_w3tp((fs::path(samples_dir) / (std::string(name) + ".w3tp")).string(),
                      shape.tokens);
            if (shape.mesh) {
                save_obj((fs::path(samples_dir) / (std::string(name) + ".obj")).string(),
                         *shape.mesh);
            } else {
                ++empty_surfaces;
                if (log) *log << "[run] sample " << i << " produced an empty iso-surface\n";
            }
        }
    });
    manifest.numbers["empty_surfaces"] = empty_surfaces;

    stage("evaluate", [&] {
        std::vector<PointCloud> ref, gen;
        for (size_t i = 0; i < entries.size(); ++i) {
            DistanceGrid grid = load_w3dg((fs::path(data_dir) / entries[i].file).string());
            TriangleMesh mesh = marching_cubes(grid, 0.0);
            ref.push_back(sample_surface_points(mesh, cfg.eval_points,
                                                RngStream::mix(cfg.seed, "eval-ref") + i));
        }
        int idx = 0;
        for (int i = 0; i < cfg.eval_gen_count; ++i) {
            char name[64];
            std::snprintf(name, sizeof(name), "sample_%04d.obj", i);
            fs::path p = fs::path(samples_dir) / name;
            if (!fs::exists(p)) continue;
            TriangleMesh mesh = load_obj(p.string());
            gen.push_back(sample_surface_points(mesh, cfg.eval_points,
                                                RngStream::mix(cfg.seed, "eval-gen") +
                                                    static_cast<uint64_t>(idx++)));
        }
        require(!gen.empty(), "no generated meshes to evaluate");
        MetricReport report = evaluate_sets(gen, ref, cfg.seed);
        std::ofstream os(report_path);
        os << report.to_json() << "\n";
        require(os.good(), "cannot write ", report_path);
        manifest.numbers["cov_cd_pct"] = report.cov_cd_pct;
        manifest.numbers["mmd_cd"] = report.mmd_cd;
        manifest.numbers["nna_cd_pct"] = report.nna_cd_pct;
    });
    manifest.add_artifact("report", report_path);

    manifest.save((fs::path(out_dir) / "manifest.json").string());
    if (log) *log << "[run] complete, manifest written\n";
    return manifest;
}

} // namespace wag3d
