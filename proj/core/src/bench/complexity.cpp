#include "wag3d/bench/complexity.hpp"

#include <cmath>

#include "wag3d/common.hpp"

namespace wag3d::bench {

ComplexityModel ComplexityModel::from_resolution(int64_t n, int64_t a) {
    require(a >= 2, "growth base must be >= 2, got ", a);
    require(n >= 1, "resolution must be positive, got ", n);
    ComplexityModel m;
    m.n = n;
    m.a = a;
    m.steps = 1;
    int64_t side = 1;
    while (side < n) {
        side *= a;
        ++m.steps;
    }
    require(side == n, "resolution ", n, " is not a power of base ", a);
    return m;
}

std::vector<int64_t> ComplexityModel::token_sides() const {
    std::vector<int64_t> sides;
    int64_t s = 1;
    for (int64_t k = 0; k < steps; ++k) {
        sides.push_back(s);
        s *= a;
    }
    return sides;
}

mpz_class naive_ar_cost(int64_t n) {
    require(n >= 1, "resolution must be positive, got ", n);
    mpz_class n3 = mpz_class(n) * n * n;
    mpz_class num = n3 * (n3 + 1) * (2 * n3 + 1);
    mpz_class out;
    mpz_divexact_ui(out.get_mpz_t(), num.get_mpz_t(), 6);
    return out;
}

mpz_class wag_token_prefix(int64_t a, int64_t k) {
    require(a >= 2, "growth base must be >= 2, got ", a);
    require(k >= 1, "step index must be >= 1, got ", k);
    mpz_class a3;
    mpz_ui_pow_ui(a3.get_mpz_t(), static_cast<unsigned long>(a), 3);
    mpz_class a3k;
    mpz_pow_ui(a3k.get_mpz_t(), a3.get_mpz_t(), static_cast<unsigned long>(k));
    mpz_class num = a3k - 1;
    mpz_class den = a3 - 1;
    mpz_class out;
    mpz_divexact(out.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    return out;
}

mpz_class wag_total_cost(int64_t a, int64_t K) {
    require(K >= 1, "step count must be >= 1, got ", K);
    mpz_class total = 0;
    for (int64_t k = 1; k <= K; ++k) {
        mpz_class p = wag_token_prefix(a, k);
        total += p * p;
    }
    return total;
}

mpz_class schedule_pair_count(const std::vector<int64_t>& flat_sizes) {
    mpz_class total = 0;
    mpz_class prefix = 0;
    for (int64_t s : flat_sizes) {
        require(s >= 1, "scale sizes must be positive");
        prefix += s;
        total += prefix * prefix;
    }
    return total;
}

double fitted_exponent(const std::vector<std::pair<double, mpz_class>>& points) {
    require(points.size() >= 2, "need at least two points to fit a slope");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(points.size());
    for (const auto& [n, cost] : points) {
        require(n > 0 && sgn(cost) > 0, "points must be positive for a log-log fit");
        double x = std::log(n);
        // log via mantissa/exponent split so arbitrarily large costs stay exact enough
        signed long exp2;
        double mant = mpz_get_d_2exp(&exp2, cost.get_mpz_t());
        double y = std::log(mant) + static_cast<double>(exp2) * std::log(2.0);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

} // namespace wag3d::bench
