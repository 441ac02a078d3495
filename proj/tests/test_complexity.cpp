#include <doctest.h>

#include "wag3d/bench/complexity.hpp"

using namespace wag3d::bench;

namespace {

// loop-literal oracles, independent of the closed forms under test
mpz_class naive_sum_oracle(int64_t n) {
    mpz_class total = 0;
    mpz_class n3 = mpz_class(n) * n * n;
    for (mpz_class i = 1; i <= n3; ++i) total += i * i;
    return total;
}

mpz_class prefix_oracle(int64_t a, int64_t k) {
    mpz_class total = 0;
    for (int64_t i = 1; i <= k; ++i) {
        mpz_class t;
        mpz_ui_pow_ui(t.get_mpz_t(), static_cast<unsigned long>(a),
                      static_cast<unsigned long>(3 * (i - 1)));
        total += t;
    }
    return total;
}

mpz_class total_cost_oracle(int64_t a, int64_t K) {
    mpz_class total = 0;
    for (int64_t k = 1; k <= K; ++k) {
        mpz_class p = prefix_oracle(a, k);
        total += p * p;
    }
    return total;
}

} // namespace

TEST_CASE("naive AR cost closed form") {
    CHECK(naive_ar_cost(1) == 1);
    CHECK(naive_ar_cost(2) == 204); // 8*9*17/6
    for (int64_t n = 1; n <= 6; ++n) CHECK(naive_ar_cost(n) == naive_sum_oracle(n));
}

TEST_CASE("token prefix geometric sum") {
    CHECK(wag_token_prefix(2, 3) == 73);
    CHECK(wag_token_prefix(3, 2) == 28);
    for (int64_t a : {2, 3, 4}) CHECK(wag_token_prefix(a, 1) == 1);
    for (int64_t a : {2, 3})
        for (int64_t k = 1; k <= 6; ++k) CHECK(wag_token_prefix(a, k) == prefix_oracle(a, k));
}

TEST_CASE("total cost matches brute force") {
    for (int64_t K = 1; K <= 5; ++K) CHECK(wag_total_cost(2, K) == total_cost_oracle(2, K));
    CHECK(wag_total_cost(3, 4) == total_cost_oracle(3, 4));
}

TEST_CASE("schedule pair count") {
    // schedule (1, 2, 3)^3: prefixes 1, 9, 36 -> 1 + 81 + 1296
    CHECK(schedule_pair_count({1, 8, 27}) == mpz_class(1 + 81 + 1296));
    // geometric schedules agree with wag_total_cost
    for (int64_t K = 1; K <= 5; ++K) {
        std::vector<int64_t> sizes;
        int64_t s = 1;
        for (int64_t k = 0; k < K; ++k) {
            sizes.push_back(s);
            s *= 8;
        }
        CHECK(schedule_pair_count(sizes) == wag_total_cost(2, K));
    }
}

TEST_CASE("fitted exponents over a doubling grid") {
    std::vector<std::pair<double, mpz_class>> naive_pts, wag_pts;
    for (int64_t n = 4; n <= 64; n *= 2) {
        naive_pts.push_back({static_cast<double>(n), naive_ar_cost(n)});
        auto model = ComplexityModel::from_resolution(n, 2);
        wag_pts.push_back({static_cast<double>(n), wag_total_cost(2, model.steps)});
    }
    CHECK(fitted_exponent(naive_pts) == doctest::Approx(9.0).epsilon(0.034));
    CHECK(fitted_exponent(wag_pts) == doctest::Approx(6.0).epsilon(0.05));
}

TEST_CASE("complexity model validation") {
    auto m = ComplexityModel::from_resolution(64, 2);
    CHECK(m.steps == 7);
    CHECK(m.token_sides() == std::vector<int64_t>{1, 2, 4, 8, 16, 32, 64});
    CHECK_THROWS(ComplexityModel::from_resolution(10, 2));
    CHECK_THROWS(ComplexityModel::from_resolution(8, 1));
}
