#pragma once

#include <functional>
#include <iosfwd>
#include <memory>

#include "wag3d/nn/checkpoint.hpp"
#include "wag3d/quantize/residual_vq.hpp"
#include "wag3d/vqvae/autoencoder.hpp"
#include "wag3d/wavelet/packing.hpp"

namespace wag3d {

// Stage-1 configuration: autoencoder, quantizer, loss weights, and the
// wavelet provenance needed to invert generated volumes back to grids.
struct Stage1Config {
    AutoencoderConfig ae;
    int64_t vocab = 128;
    std::vector<int> schedule_sides = {1, 2, 3, 4};
    InterpMode interp = InterpMode::trilinear;
    QuantizerMode quantizer_mode = QuantizerMode::nn;
    std::vector<int> fsq_levels;
    double lambda_recon = 1.0;
    double lambda_commit = 0.25;
    double lr = 1e-4;
    double ema_decay = 0.99;
    int restart_window = 40;
    int batch_size = 4;

    std::string wavelet_family = "haar";
    int wavelet_levels = 2;
    int keep_levels = 1;
    int grid_resolution = 32;
    double truncation = 0.1;

    int input_side() const { return grid_resolution >> wavelet_levels; }
    ScaleSchedule schedule() const;
    void validate() const;
    KvMap to_kv() const;
    static Stage1Config from_kv(const KvMap& kv);
};

CompactWaveletVolume grid_to_volume(const DistanceGrid& grid, const Stage1Config& cfg);
Tensor volume_to_tensor(const CompactWaveletVolume& volume);
CompactWaveletVolume tensor_to_volume(const Tensor& t, const CompactWaveletVolume& like);

// Trainable stage-1 state: autoencoder + refiner parameters, the shared
// codebook, optimizer moments and the training RNG.
struct Stage1Model {
    Stage1Config cfg;
    Autoencoder ae;
    nn::ParamStore params;
    nn::Adam opt;
    Codebook codebook;
    RngStream train_rng;
    int64_t step = 0;

    static Stage1Model create(const Stage1Config& cfg, uint64_t seed);

    std::unique_ptr<Quantizer> make_quantizer() const;
    ScaleRefiners refiners_view() const; // copies the refiner parameters

    // frozen-value paths (same kernels as the training graph)
    Tensor encode_latent(const Tensor& w) const;
    Tensor decode_latent(const Tensor& z_recon) const;
    TokenMapPyramid tokenize_volume(const CompactWaveletVolume& volume) const;
    CompactWaveletVolume reconstruct_tokens(const TokenMapPyramid& tokens,
                                            const CompactWaveletVolume& like) const;
    double reconstruction_mse(const CompactWaveletVolume& volume) const;

    void save(const std::string& path) const;
    static Stage1Model load(const std::string& path);
};

// quantized: the real path (lookups constant, tokens emitted).
// bypass: quantization replaced by identity, making the whole forward
// differentiable; used by the finite-difference harness.
enum class QuantizePath { quantized, bypass };

struct Stage1Forward {
    nn::NodePtr loss;
    nn::NodePtr recon_term;  // || W - What ||_2
    nn::NodePtr commit_term; // sum_k || z_k_res - zhat_k_res ||_2
    TokenMapPyramid tokens;
    std::vector<double> residuals; // collected z_k_res vectors for the EMA update
    int64_t residual_count = 0;
};

Stage1Forward stage1_forward(nn::Graph& g, Stage1Model& model, const Tensor& w,
                             QuantizePath path, bool straight_through);

// Eq-style loss on plain values, mirroring the graph formula.
struct Stage1LossValue {
    double total, recon, commit;
};
Stage1LossValue stage1_loss(const Tensor& w, const Tensor& what,
                            const std::vector<ResidualPair>& pairs, double lambda_recon,
                            double lambda_commit);

struct Stage1StepStats {
    double loss, recon, commit, usage_entropy;
};

Stage1StepStats train_step_stage1(Stage1Model& model,
                                  const std::vector<const CompactWaveletVolume*>& batch);

using Stage1Observer = std::function<void(int64_t step, const Stage1StepStats&)>;

Stage1Model train_stage1(const std::vector<CompactWaveletVolume>& dataset,
                         const Stage1Config& cfg, int64_t steps, uint64_t seed,
                         std::ostream* log, const Stage1Observer& observer = nullptr);

double codebook_usage_entropy(const Codebook& cb);

} // namespace wag3d
