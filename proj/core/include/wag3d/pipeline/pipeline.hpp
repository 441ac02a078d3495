#pragma once

#include <iosfwd>

#include "wag3d/pipeline/config.hpp"
#include "wag3d/pipeline/manifest.hpp"
#include "wag3d/prior/stage2.hpp"

namespace wag3d {

struct DatasetEntry {
    std::string file; // relative to the index directory
    int class_id;
    std::string kind;
};

void write_index(const std::string& dir, const std::vector<DatasetEntry>& entries);
std::vector<DatasetEntry> read_index(const std::string& dir);

// Writes count W3DG grids plus index.json. Class labels are per-instance or
// per-kind depending on label_mode; kinds cycle round-robin.
struct DataSpec {
    std::vector<std::string> kinds;
    int count;
    int resolution;
    double tau;
    uint64_t seed;
    std::string label_mode;

    static DataSpec from_config(const ExperimentConfig& cfg) {
        return {cfg.kinds, cfg.count, cfg.resolution, cfg.tau, cfg.seed, cfg.label_mode};
    }
    void validate() const;
};
std::vector<DatasetEntry> generate_dataset(const DataSpec& spec, const std::string& out_dir);

// One W3TP per grid, plus an index carrying the class labels. Deterministic
// for a frozen stage-1 checkpoint.
void tokenize_dataset(const std::string& grids_dir, const Stage1Model& stage1,
                      const std::string& tokens_dir);

std::vector<CompactWaveletVolume> load_volumes(const std::string& grids_dir,
                                               const std::vector<DatasetEntry>& entries,
                                               const Stage1Config& cfg);

// gen-data -> train-vqvae -> tokenize -> train-prior -> generate -> evaluate.
// The run owns out_dir via a lock file; failures abort with the stage name
// and leave partial artifacts in place.
RunManifest run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                           std::ostream* log);

} // namespace wag3d
