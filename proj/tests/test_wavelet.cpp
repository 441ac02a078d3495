#include <doctest.h>

#include <filesystem>

#include "wag3d/wavelet/packing.hpp"
#include "test_helpers.hpp"

using namespace wag3d;

namespace {

// ---- independent oracle: direct convolution against the extended signal ----

double extended(const std::vector<double>& x, int j, ExtensionMode mode) {
    const int n = static_cast<int>(x.size());
    if (j >= 0 && j < n) return x[static_cast<size_t>(j)];
    if (mode == ExtensionMode::zero) return 0.0;
    if (n == 1) return x[0];
    int period = 2 * (n - 1);
    j = ((j % period) + period) % period;
    return x[static_cast<size_t>(j < n ? j : period - j)];
}

void conv_analysis_1d(const FilterBank& fb, const std::vector<double>& x,
                      std::vector<double>& lo, std::vector<double>& hi) {
    const int h = static_cast<int>(x.size()) / 2;
    lo.assign(static_cast<size_t>(h), 0.0);
    hi.assign(static_cast<size_t>(h), 0.0);
    for (int i = 0; i < h; ++i) {
        for (size_t t = 0; t < fb.analysis_low.size(); ++t)
            lo[static_cast<size_t>(i)] +=
                fb.analysis_low[t] *
                extended(x, 2 * i + static_cast<int>(t) - fb.analysis_low_delay, fb.extension);
        for (size_t t = 0; t < fb.analysis_high.size(); ++t)
            hi[static_cast<size_t>(i)] +=
                fb.analysis_high[t] *
                extended(x, 2 * i + 1 + static_cast<int>(t) - fb.analysis_high_delay, fb.extension);
    }
}

struct OraclePyramid {
    std::vector<double> coarse;
    std::vector<std::array<std::vector<double>, 7>> details;
};

// literal separable transform: gather each axis line, convolve, scatter
OraclePyramid dwt3_oracle(const DistanceGrid& grid, const FilterBank& fb, int levels) {
    int m = grid.n;
    std::vector<double> cur(grid.values.begin(), grid.values.end());
    OraclePyramid out;
    out.details.resize(static_cast<size_t>(levels));
    for (int level = 1; level <= levels; ++level) {
        std::vector<double> work = cur;
        auto idx = [m](int x, int y, int z) {
            return (static_cast<size_t>(z) * m + y) * m + x;
        };
        for (int axis = 0; axis < 3; ++axis) {
            std::vector<double> next(work.size());
            std::vector<double> line(static_cast<size_t>(m)), lo, hi;
            for (int a = 0; a < m; ++a)
                for (int b = 0; b < m; ++b) {
                    for (int c = 0; c < m; ++c) {
                        int x = axis == 0 ? c : (axis == 1 ? a : a);
                        int y = axis == 0 ? a : (axis == 1 ? c : b);
                        int z = axis == 0 ? b : (axis == 1 ? b : c);
                        line[static_cast<size_t>(c)] = work[idx(x, y, z)];
                    }
                    conv_analysis_1d(fb, line, lo, hi);
                    for (int c = 0; c < m / 2; ++c) {
                        auto put = [&](int c2, double v) {
                            int x = axis == 0 ? c2 : (axis == 1 ? a : a);
                            int y = axis == 0 ? a : (axis == 1 ? c2 : b);
                            int z = axis == 0 ? b : (axis == 1 ? b : c2);
                            next[idx(x, y, z)] = v;
                        };
                        put(c, lo[static_cast<size_t>(c)]);
                        put(c + m / 2, hi[static_cast<size_t>(c)]);
                    }
                }
            work.swap(next);
        }
        const int h = m / 2;
        for (int mask = 1; mask <= 7; ++mask) {
            auto& band = out.details[static_cast<size_t>(level - 1)][static_cast<size_t>(mask - 1)];
            band.resize(static_cast<size_t>(h) * h * h);
            size_t o = 0;
            for (int z = 0; z < h; ++z)
                for (int y = 0; y < h; ++y)
                    for (int x = 0; x < h; ++x, ++o)
                        band[o] = work[(static_cast<size_t>(z + ((mask >> 2) & 1) * h) * m +
                                        (y + ((mask >> 1) & 1) * h)) *
                                           m +
                                       (x + (mask & 1) * h)];
        }
        std::vector<double> coarse(static_cast<size_t>(h) * h * h);
        size_t o = 0;
        for (int z = 0; z < h; ++z)
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < h; ++x, ++o)
                    coarse[o] = work[(static_cast<size_t>(z) * m + y) * m + x];
        cur.swap(coarse);
        m = h;
    }
    out.coarse = cur;
    return out;
}

double grid_energy(const DistanceGrid& g) {
    double e = 0.0;
    for (float v : g.values) e += static_cast<double>(v) * v;
    return e;
}

} // namespace

TEST_CASE("filter banks satisfy their invariants") {
    for (auto family : {WaveletFamily::haar, WaveletFamily::bior5_3}) {
        FilterBank fb = FilterBank::make(family);
        CHECK_NOTHROW(fb.validate());
        double dc = 0.0;
        for (double t : fb.analysis_high) dc += t;
        CHECK(std::abs(dc) < 1e-12);
    }
    CHECK_THROWS(FilterBank::make("db4"));
}

TEST_CASE("haar 2x2x2 of ones") {
    DistanceGrid g(2, 1.5);
    for (auto& v : g.values) v = 1.0f;
    WaveletPyramid pyr = dwt3(g, FilterBank::make(WaveletFamily::haar), 1);
    REQUIRE(pyr.coarse.size() == 1);
    CHECK(pyr.coarse[0] == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
    for (const auto& band : pyr.details[0])
        CHECK(std::abs(band[0]) < 1e-12);
}

TEST_CASE("constant grids have zero detail") {
    for (auto family : {WaveletFamily::haar, WaveletFamily::bior5_3}) {
        DistanceGrid g(16, 0.1);
        for (auto& v : g.values) v = 0.05f;
        WaveletPyramid pyr = dwt3(g, FilterBank::make(family), 2);
        for (const auto& level : pyr.details)
            for (const auto& band : level)
                for (double v : band) CHECK(std::abs(v) < 1e-12);
        for (size_t i = 1; i < pyr.coarse.size(); ++i)
            CHECK(pyr.coarse[i] == doctest::Approx(pyr.coarse[0]).epsilon(1e-12));
    }
}

TEST_CASE("impulse responses equal the direct convolution oracle") {
    // exercises interior and boundary (corner) tap placement for both banks
    for (auto family : {WaveletFamily::haar, WaveletFamily::bior5_3}) {
        FilterBank fb = FilterBank::make(family);
        for (auto [ix, iy, iz] : {std::array<int, 3>{5, 3, 2}, std::array<int, 3>{0, 0, 0},
                                  std::array<int, 3>{7, 0, 5}}) {
            DistanceGrid g(8, 1.5);
            g.at(ix, iy, iz) = 1.0f;
            WaveletPyramid pyr = dwt3(g, fb, 1);
            OraclePyramid oracle = dwt3_oracle(g, fb, 1);
            for (size_t i = 0; i < pyr.coarse.size(); ++i)
                CHECK(pyr.coarse[i] == doctest::Approx(oracle.coarse[i]).epsilon(1e-12));
            for (int mask = 1; mask <= 7; ++mask)
                for (size_t i = 0; i < pyr.details[0][static_cast<size_t>(mask - 1)].size(); ++i)
                    CHECK(pyr.details[0][static_cast<size_t>(mask - 1)][i] ==
                          doctest::Approx(oracle.details[0][static_cast<size_t>(mask - 1)][i])
                              .epsilon(1e-12));
        }
    }
}

TEST_CASE("random grids match the oracle at two levels") {
    RngStream rng(9);
    for (auto family : {WaveletFamily::haar, WaveletFamily::bior5_3}) {
        FilterBank fb = FilterBank::make(family);
        DistanceGrid g = wag3d::testing::random_grid(16, 0.1, rng);
        WaveletPyramid pyr = dwt3(g, fb, 2);
        OraclePyramid oracle = dwt3_oracle(g, fb, 2);
        double worst = 0.0;
        for (size_t i = 0; i < pyr.coarse.size(); ++i)
            worst = std::max(worst, std::abs(pyr.coarse[i] - oracle.coarse[i]));
        for (int level = 0; level < 2; ++level)
            for (int b = 0; b < 7; ++b)
                for (size_t i = 0; i < pyr.details[level][b].size(); ++i)
                    worst = std::max(worst,
                                     std::abs(pyr.details[level][b][i] - oracle.details[level][b][i]));
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("perfect reconstruction") {
    RngStream rng(21);
    for (auto family : {WaveletFamily::haar, WaveletFamily::bior5_3}) {
        FilterBank fb = FilterBank::make(family);
        for (int levels : {1, 2, 3}) {
            DistanceGrid g = wag3d::testing::random_grid(32, 0.1, rng);
            DistanceGrid back = idwt3(dwt3(g, fb, levels), fb);
            double worst = 0.0;
            for (size_t i = 0; i < g.values.size(); ++i)
                worst = std::max(worst,
                                 std::abs(static_cast<double>(g.values[i]) - back.values[i]));
            CHECK(worst <= 1e-5 * g.truncation);
        }
    }
}

TEST_CASE("zero pyramid inverts to zero and scaling is linear") {
    FilterBank fb = FilterBank::make(WaveletFamily::haar);
    DistanceGrid g(8, 0.1);
    WaveletPyramid zero = dwt3(g, fb, 2);
    DistanceGrid back = idwt3(zero, fb);
    for (float v : back.values) CHECK(v == 0.0f);

    RngStream rng(5);
    DistanceGrid r = wag3d::testing::random_grid(8, 0.1, rng);
    WaveletPyramid pyr = dwt3(r, fb, 2);
    WaveletPyramid scaled = pyr;
    for (auto& v : scaled.coarse) v *= 2.0;
    for (auto& level : scaled.details)
        for (auto& band : level)
            for (auto& v : band) v *= 2.0;
    DistanceGrid a = idwt3(pyr, fb);
    DistanceGrid b = idwt3(scaled, fb);
    for (size_t i = 0; i < a.values.size(); ++i)
        CHECK(static_cast<double>(b.values[i]) ==
              doctest::Approx(2.0 * a.values[i]).epsilon(1e-6));
}

TEST_CASE("transform linearity to 1e-10") {
    RngStream rng(13);
    for (auto family : {WaveletFamily::haar, WaveletFamily::bior5_3}) {
        FilterBank fb = FilterBank::make(family);
        DistanceGrid g1 = wag3d::testing::random_grid(16, 0.2, rng);
        DistanceGrid g2 = wag3d::testing::random_grid(16, 0.2, rng);
        const double alpha = 0.7, beta = -1.3;
        DistanceGrid mix(16, 1.0);
        for (size_t i = 0; i < mix.values.size(); ++i)
            mix.values[i] = static_cast<float>(alpha * g1.values[i] + beta * g2.values[i]);
        // the f32 grid cast is itself lossy; fold its rounding into the bound
        WaveletPyramid pm = dwt3(mix, fb, 2);
        WaveletPyramid p1 = dwt3(g1, fb, 2);
        WaveletPyramid p2 = dwt3(g2, fb, 2);
        // compensate for the single f32 rounding of the mixed grid
        double input_round = 0.0;
        for (size_t i = 0; i < mix.values.size(); ++i)
            input_round = std::max(input_round,
                                   std::abs(static_cast<double>(mix.values[i]) -
                                            (alpha * g1.values[i] + beta * g2.values[i])));
        double tol = 1e-10 + 16.0 * input_round; // transform gain bound at J=2
        double worst = 0.0;
        for (size_t i = 0; i < pm.coarse.size(); ++i)
            worst = std::max(worst,
                             std::abs(pm.coarse[i] - (alpha * p1.coarse[i] + beta * p2.coarse[i])));
        for (int level = 0; level < 2; ++level)
            for (int b = 0; b < 7; ++b)
                for (size_t i = 0; i < pm.details[level][b].size(); ++i)
                    worst = std::max(worst, std::abs(pm.details[level][b][i] -
                                                     (alpha * p1.details[level][b][i] +
                                                      beta * p2.details[level][b][i])));
        CHECK(worst <= tol);
    }
}

TEST_CASE("haar conserves energy") {
    RngStream rng(31);
    FilterBank fb = FilterBank::make(WaveletFamily::haar);
    for (int levels : {1, 2, 3}) {
        DistanceGrid g = wag3d::testing::random_grid(32, 0.1, rng);
        WaveletPyramid pyr = dwt3(g, fb, levels);
        double ge = grid_energy(g);
        CHECK(std::abs(pyr.energy() - ge) <= 1e-8 * ge);
    }
}

TEST_CASE("decomposition depth limits") {
    DistanceGrid g(16, 0.1);
    for (auto& v : g.values) v = 0.01f;
    CHECK_THROWS(dwt3(g, FilterBank::make(WaveletFamily::haar), 5)); // 16/32 not integral
    CHECK_THROWS(dwt3(g, FilterBank::make(WaveletFamily::bior5_3), 4)); // coarse side 1 < 2
    CHECK_NOTHROW(dwt3(g, FilterBank::make(WaveletFamily::haar), 4));
}

TEST_CASE("packing channel counts") {
    CHECK(packed_channels(2, 1) == 8);
    CHECK(packed_channels(2, 2) == 64);
    CHECK(packed_channels(3, 1) == 8);
    CHECK(packed_channels(3, 2) == 64);
    CHECK(packed_channels(1, 1) == 8);

    RngStream rng(17);
    DistanceGrid g = wag3d::testing::random_grid(64, 0.1, rng);
    WaveletPyramid pyr = dwt3(g, FilterBank::make(WaveletFamily::haar), 2);
    CompactWaveletVolume one = pack(pyr, 1);
    CHECK(one.channels == 8);
    CHECK(one.h == 16);
    CompactWaveletVolume two = pack(pyr, 2);
    CHECK(two.channels == 64);
    CHECK(two.h == 16);
}

TEST_CASE("pack/unpack bijection and lossless round trip") {
    RngStream rng(23);
    FilterBank fb = FilterBank::make(WaveletFamily::haar);
    DistanceGrid g = wag3d::testing::random_grid(32, 0.1, rng);
    WaveletPyramid pyr = dwt3(g, fb, 2);

    // keep everything: grid reconstructs through the packed form
    CompactWaveletVolume all = pack(pyr, 2);
    WaveletPyramid back = unpack(all);
    DistanceGrid rec = idwt3(back, fb);
    double worst = 0.0;
    for (size_t i = 0; i < g.values.size(); ++i)
        worst = std::max(worst, std::abs(static_cast<double>(g.values[i]) - rec.values[i]));
    CHECK(worst <= 1e-5 * g.truncation);

    // pack . unpack is the identity on compact volumes (bit-exact)
    CompactWaveletVolume again = pack(unpack(all), 2);
    CHECK(again.values == all.values);
    CHECK(again.channels == all.channels);

    // unpack of a  pack keeps retained bands bit-equal once representable in f32
    WaveletPyramid fixed = unpack(all);
    WaveletPyramid fixed2 = unpack(pack(fixed, 2));
    CHECK(fixed2.coarse == fixed.coarse);
    for (int level = 0; level < 2; ++level)
        for (int b = 0; b < 7; ++b)
            CHECK(fixed2.details[level][b] == fixed.details[level][b]);

    // dropped finer level comes back as zeros
    CompactWaveletVolume coarse_only = pack(pyr, 1);
    WaveletPyramid dropped = unpack(coarse_only);
    for (int b = 0; b < 7; ++b)
        for (double v : dropped.details[0][b]) CHECK(v == 0.0);
}

TEST_CASE("lossy round-trip error equals the dropped energy (haar)") {
    RngStream rng(29);
    FilterBank fb = FilterBank::make(WaveletFamily::haar);
    DistanceGrid g = wag3d::testing::random_grid(32, 0.1, rng);
    WaveletPyramid pyr = dwt3(g, fb, 2);
    CompactWaveletVolume kept = pack(pyr, 1);
    DistanceGrid rec = idwt3(unpack(kept), fb);

    double err_energy = 0.0;
    for (size_t i = 0; i < g.values.size(); ++i) {
        double d = static_cast<double>(g.values[i]) - rec.values[i];
        err_energy += d * d;
    }
    double dropped_energy = 0.0;
    for (int b = 0; b < 7; ++b)
        for (double v : pyr.details[0][b]) dropped_energy += v * v;
    CHECK(err_energy == doctest::Approx(dropped_energy).epsilon(1e-6));
}

TEST_CASE("W3CW round trip") {
    namespace fs = std::filesystem;
    RngStream rng(41);
    DistanceGrid g = wag3d::testing::random_grid(16, 0.1, rng);
    CompactWaveletVolume vol = pack(dwt3(g, FilterBank::make(WaveletFamily::bior5_3), 2), 2);
    fs::path path = fs::temp_directory_path() / "wag3d_test_vol.w3cw";
    save_w3cw(path.string(), vol);
    CompactWaveletVolume back = load_w3cw(path.string());
    CHECK(back.values == vol.values);
    CHECK(back.channels == vol.channels);
    CHECK(back.descriptor.size() == vol.descriptor.size());
    fs::remove(path);
}

TEST_CASE("MAC accounting") {
    CHECK(conv_mac_count(1, 256, 256, 256, 3, 1) == 452984832);
    CHECK(conv_mac_count(64, 46, 46, 46, 3, 1) == 168196608);
    CHECK(conv_mac_count(1, 2, 2, 2, 1, 1) == 8);
    double ratio = 452984832.0 / 168196608.0;
    CHECK(ratio == doctest::Approx(2.693).epsilon(0.001));
    CHECK_THROWS(conv_mac_count(0, 1, 1, 1, 1, 1));
}
