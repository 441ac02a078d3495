#pragma once

#include <string>
#include <vector>

#include "wag3d/geometry/mesh.hpp"

namespace wag3d {

// Chamfer distance, squared-Euclidean per term:
// mean_a min_b ||a-b||^2 + mean_b min_a ||a-b||^2.
double chamfer(const PointCloud& a, const PointCloud& b);

// Earth mover's distance between equal-size clouds: the minimum mean
// Euclidean pair distance over perfect matchings.
double emd_exact(const PointCloud& a, const PointCloud& b);    // Hungarian, O(m^3)
// Auction algorithm with epsilon scaling; the final epsilon bounds the
// suboptimality by m * epsilon and is reported through eps_out.
double emd_approx(const PointCloud& a, const PointCloud& b, double* eps_out = nullptr);
// exact solver for m <= 256, auction beyond
double emd(const PointCloud& a, const PointCloud& b);

enum class SetDistance { cd, emd };

// One direction of the set-level suite.
struct SetMetrics {
    double coverage_pct;  // fraction of ref clouds matched as some gen's nearest
    double mmd;           // mean over ref of the min distance to gen
    double nna_pct;       // leave-one-out 1-NN accuracy over the labeled union
};

SetMetrics set_metrics(const std::vector<PointCloud>& gen, const std::vector<PointCloud>& ref,
                       SetDistance distance);

// Full report across both distances, with the paper's scaling conventions
// recorded explicitly.
struct MetricReport {
    double cov_cd_pct = 0, cov_emd_pct = 0;
    double mmd_cd = 0, mmd_emd = 0;          // raw values
    double mmd_cd_scaled = 0, mmd_emd_scaled = 0; // x1e3 and x1e2
    double nna_cd_pct = 0, nna_emd_pct = 0;
    int n_gen = 0, n_ref = 0, points_per_cloud = 0;
    uint64_t seed = 0;
    std::string cd_convention = "sum of both directions' mean min squared distances";
    std::string emd_convention = "minimum mean pairwise Euclidean distance over perfect matchings";

    std::string to_json() const;
};

MetricReport evaluate_sets(const std::vector<PointCloud>& gen,
                           const std::vector<PointCloud>& ref, uint64_t seed);

} // namespace wag3d
