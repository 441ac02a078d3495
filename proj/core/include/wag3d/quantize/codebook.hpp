#pragma once

#include <cstdint>
#include <vector>

#include "wag3d/rng.hpp"
#include "wag3d/tensor.hpp"

namespace wag3d {

// Shared embedding table used by every scale. usage holds the EMA assignment
// mass per code; the ema_* buffers are the cluster-sum statistics the update
// rule maintains.
struct Codebook {
    Tensor vectors;                 // V x dim
    std::vector<double> usage;      // EMA counts, >= 0
    std::vector<double> ema_weight; // V x dim cluster sums
    std::vector<int64_t> idle_steps;

    int64_t size() const { return vectors.dim(0); }
    int64_t dim() const { return vectors.dim(1); }
    const double* code(int64_t j) const { return vectors.data() + j * dim(); }

    void validate() const;

    static Codebook init(int64_t size, int64_t dim, RngStream& rng);
};

// argmin of squared Euclidean distance; ties resolve to the lowest index
int64_t nearest_code(const double* v, const Codebook& cb);

// One EMA step over a batch of residual vectors (row-major count x dim):
// assignments by nearest code, cluster sums and counts blended with `decay`,
// and codes idle for `restart_window` consecutive updates re-seeded from the
// worst-quantized residuals of this batch (largest error first).
void codebook_update(Codebook& cb, const std::vector<double>& residuals, int64_t count,
                     double decay, int restart_window, RngStream& rng);

} // namespace wag3d
