#pragma once

#include <optional>

#include "wag3d/geometry/marching_cubes.hpp"
#include "wag3d/prior/transformer.hpp"
#include "wag3d/vqvae/stage1.hpp"

namespace wag3d {

// Stage-2 trainable state. The stage-1 checkpoint hash is recorded at
// creation and re-checked before sampling.
struct Stage2Model {
    PriorConfig cfg;
    PriorNet net;
    nn::ParamStore params;
    nn::Adam opt;
    RngStream train_rng;
    int64_t step = 0;
    uint64_t stage1_hash = 0;

    static Stage2Model create(const PriorConfig& cfg, double lr, uint64_t seed,
                              uint64_t stage1_hash);
    void save(const std::string& path) const;
    static Stage2Model load(const std::string& path);
};

// Prefix-reconstruction input features for token rows of scales 1..upto:
// block k rows hold the running reconstruction of scales < k resampled to
// scale k (zeros for k = 1), so each block depends only on strictly coarser
// tokens. pyramid must contain at least upto-1 scales.
Tensor teacher_forced_inputs(const TokenMapPyramid& pyramid, const Quantizer& quantizer,
                             const ScaleSchedule& schedule, const ScaleRefiners& refiners,
                             int upto);

// mean cross-entropy over every token plus the per-scale breakdown
struct Stage2Loss {
    double total;
    std::vector<double> per_scale;
};
Stage2Loss stage2_loss_value(const Tensor& logits, const TokenMapPyramid& targets);

struct TokenSample {
    TokenMapPyramid pyramid;
    int class_id; // may be the null class
};

struct Stage2StepStats {
    double ce;
    std::vector<double> ce_per_scale;
};

Stage2StepStats train_step_stage2(Stage2Model& model, const Stage1Model& stage1,
                                  const std::vector<const TokenSample*>& batch);

Stage2Model train_stage2(const std::vector<TokenSample>& dataset, const Stage1Model& stage1,
                         const PriorConfig& cfg, double lr, int64_t steps, uint64_t seed,
                         uint64_t stage1_hash, std::ostream* log);

// Progressive next-scale sampling: exactly one model invocation per scale.
// temperature <= 1e-6 degenerates to argmax; top_k <= 0 keeps the full
// distribution. class_id < 0 selects the null class.
TokenMapPyramid sample_tokens(Stage2Model& model, const Stage1Model& stage1, int class_id,
                              double temperature, int top_k, uint64_t seed,
                              PriorInstrumentation* hooks = nullptr);

// token-by-token ablation: same weights, per-token causal mask, one
// invocation per token
TokenMapPyramid sample_tokens_token_by_token(Stage2Model& model, const Stage1Model& stage1,
                                             int class_id, double temperature, int top_k,
                                             uint64_t seed,
                                             PriorInstrumentation* hooks = nullptr);

struct GeneratedShape {
    TokenMapPyramid tokens;
    CompactWaveletVolume volume;
    DistanceGrid grid;
    std::optional<TriangleMesh> mesh; // empty when the iso-surface is empty
    bool empty_surface = false;
};

// canonical (all-zero) compact volume layout for a stage-1 configuration
CompactWaveletVolume canonical_volume(const Stage1Config& cfg);

GeneratedShape generate_shape(Stage2Model& model, const Stage1Model& stage1, int class_id,
                              double temperature, int top_k, uint64_t seed);

// instrumented step/pair counts for the complexity bench
struct EmpiricalCounts {
    int64_t steps;
    int64_t attention_pairs;       // layer-0 head-0 token-token products
    int64_t attention_pairs_total; // all layers and heads, start row included
};
enum class SamplingMode { next_scale, token_by_token };
EmpiricalCounts measure_empirical(Stage2Model& model, const Stage1Model& stage1,
                                  SamplingMode mode, uint64_t seed);

} // namespace wag3d
