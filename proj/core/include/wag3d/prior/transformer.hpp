#pragma once

#include <string>

#include "wag3d/kvconfig.hpp"
#include "wag3d/nn/adam.hpp"
#include "wag3d/nn/ops.hpp"
#include "wag3d/prior/layout.hpp"

namespace wag3d {

// Decoder-only transformer over the flattened scale sequence. Class
// conditioning enters as the start token and as the AdaLN modulation source
// in every block; queries and keys are normalized to unit vectors before the
// similarity product and scaled by a learnable per-head logit scale.
struct PriorConfig {
    int width = 128;
    int depth = 4;
    int heads = 4;
    int64_t vocab = 128;
    int num_classes = 8; // real classes; index num_classes is the null class
    int latent_dim = 8;  // C_z of the stage-1 latent (input projection width)
    std::vector<int> schedule_sides = {1, 2, 3, 4};
    InterpMode interp = InterpMode::trilinear;
    double label_dropout = 0.1;
    double qk_scale_init = 10.0;
    double ln_eps = 1e-6;

    int null_class() const { return num_classes; }
    ScaleSchedule schedule() const { return ScaleSchedule::cubic(schedule_sides, interp); }
    void validate() const;
    KvMap to_kv() const;
    static PriorConfig from_kv(const KvMap& kv);
};

// forward-pass counters and the QK-norm probe
struct PriorInstrumentation {
    int64_t model_invocations = 0;
    int64_t qk_pairs_total = 0;   // q.k products over all layers and heads
    int64_t qk_token_pairs = 0;   // layer-0 head-0 products between token rows
    double max_qk_unit_err = 0.0; // worst | ||q|| - 1 | seen entering attention
};

class PriorNet {
public:
    explicit PriorNet(PriorConfig cfg);

    const PriorConfig& config() const { return cfg_; }
    const SequenceLayout& layout() const { return layout_; }

    void register_params(nn::ParamStore& params, RngStream& rng) const;

    // Logits for token rows of the first `rows` sequence positions.
    // inputs: ((rows-1) x latent_dim) prefix-reconstruction features for the
    // token rows; class_id may be the null class. The mask bias is
    // (rows x rows) additive. Returns ((rows-1) x vocab).
    nn::NodePtr logits(nn::Graph& g, nn::ParamStore& params, const Tensor& inputs, int class_id,
                       const Tensor& mask_bias, PriorInstrumentation* hooks) const;

private:
    nn::NodePtr block(nn::Graph& g, nn::ParamStore& p, nn::NodePtr h, nn::NodePtr cond,
                      nn::NodePtr mask, int index, PriorInstrumentation* hooks) const;

    PriorConfig cfg_;
    SequenceLayout layout_;
};

} // namespace wag3d
