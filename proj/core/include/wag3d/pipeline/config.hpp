#pragma once

#include <string>
#include <vector>

#include "wag3d/prior/transformer.hpp"
#include "wag3d/vqvae/stage1.hpp"

namespace wag3d {

// Whole-experiment configuration, parsed from flat `section.key = value`
// text. Derived fields (packed channel count, latent side, stage-2 vocab and
// schedule, class count) are computed here so cross-section inconsistencies
// fail at load time. WAG3D_SEED in the environment overrides data.seed.
struct ExperimentConfig {
    // data
    std::vector<std::string> kinds = {"sphere", "box"};
    int count = 8;
    int resolution = 32;
    double tau = 0.1;
    uint64_t seed = 7;
    std::string label_mode = "instance"; // instance | kind

    // stage 1 (includes the wavelet section)
    Stage1Config stage1;
    int64_t stage1_steps = 2000;

    // stage 2
    PriorConfig stage2;
    double stage2_lr = 1e-3;
    int64_t stage2_steps = 5000;
    double temperature = 1.0;
    int top_k = 64;

    // eval
    int eval_points = 256;
    int eval_gen_count = 16;

    int num_classes() const {
        return label_mode == "instance" ? count : static_cast<int>(kinds.size());
    }

    void validate() const;
    KvMap to_kv() const;
    static ExperimentConfig from_kv(const KvMap& kv);
    static ExperimentConfig load(const std::string& path);
};

} // namespace wag3d
