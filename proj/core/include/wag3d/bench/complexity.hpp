#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <gmpxx.h>

namespace wag3d::bench {

// Growth model for the progressive-resolution cost analysis: step k emits a
// token map of side n_k = a^(k-1), so the final side n = a^(K-1).
struct ComplexityModel {
    int64_t n = 0;     // final (cubic) resolution
    int64_t a = 2;     // per-step growth base, integer >= 2 here
    int64_t steps = 0; // K = log_a(n) + 1

    static ComplexityModel from_resolution(int64_t n, int64_t a);
    std::vector<int64_t> token_sides() const; // n_1..n_K
};

// Cost of plain token-by-token generation of an n^3 volume: sum_{i=1}^{n^3} i^2,
// evaluated in closed form n^3(n^3+1)(2n^3+1)/6 with exact big-int arithmetic.
mpz_class naive_ar_cost(int64_t n);

// Tokens emitted through step k under n_i = a^(i-1): (a^{3k} - 1) / (a^3 - 1).
mpz_class wag_token_prefix(int64_t a, int64_t k);

// Attention-pair cost of next-scale generation: sum_{k=1}^{K} prefix(k)^2.
mpz_class wag_total_cost(int64_t a, int64_t K);

// Same pair-count formula applied to an arbitrary schedule of per-scale flat
// sizes S_k (tokens per scale), not just the geometric family.
mpz_class schedule_pair_count(const std::vector<int64_t>& flat_sizes);

// Least-squares slope of log(cost) against log(n). Costs must be positive.
double fitted_exponent(const std::vector<std::pair<double, mpz_class>>& points);

} // namespace wag3d::bench
