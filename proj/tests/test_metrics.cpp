#include <doctest.h>

#include "wag3d/metrics/pointcloud_metrics.hpp"
#include "wag3d/rng.hpp"

using namespace wag3d;

namespace {

PointCloud random_cloud(int m, RngStream& rng, Vec3 center = {0, 0, 0}, double spread = 0.3) {
    PointCloud c;
    for (int i = 0; i < m; ++i)
        c.points.push_back({center[0] + spread * rng.uniform(-1, 1),
                            center[1] + spread * rng.uniform(-1, 1),
                            center[2] + spread * rng.uniform(-1, 1)});
    return c;
}

// fresh literal implementation used as the oracle
double chamfer_oracle(const PointCloud& a, const PointCloud& b) {
    double sa = 0.0;
    for (size_t i = 0; i < a.points.size(); ++i) {
        double best = 1e300;
        for (size_t j = 0; j < b.points.size(); ++j) {
            double dx = a.points[i][0] - b.points[j][0];
            double dy = a.points[i][1] - b.points[j][1];
            double dz = a.points[i][2] - b.points[j][2];
            best = std::min(best, dx * dx + dy * dy + dz * dz);
        }
        sa += best;
    }
    double sb = 0.0;
    for (size_t j = 0; j < b.points.size(); ++j) {
        double best = 1e300;
        for (size_t i = 0; i < a.points.size(); ++i) {
            double dx = a.points[i][0] - b.points[j][0];
            double dy = a.points[i][1] - b.points[j][1];
            double dz = a.points[i][2] - b.points[j][2];
            best = std::min(best, dx * dx + dy * dy + dz * dz);
        }
        sb += best;
    }
    return sa / a.points.size() + sb / b.points.size();
}

struct OracleSetMetrics {
    double cov, mmd, nna;
};

OracleSetMetrics set_metrics_oracle(const std::vector<PointCloud>& gen,
                                    const std::vector<PointCloud>& ref, SetDistance dist) {
    auto dd = [&](const PointCloud& a, const PointCloud& b) {
        return dist == SetDistance::cd ? chamfer(a, b) : emd_exact(a, b);
    };
    std::vector<char> matched(ref.size(), 0);
    for (const auto& g : gen) {
        size_t best = 0;
        double bd = 1e300;
        for (size_t j = 0; j < ref.size(); ++j) {
            double v = dd(g, ref[j]);
            if (v < bd) {
                bd = v;
                best = j;
            }
        }
        matched[best] = 1;
    }
    double cov = 0;
    for (char c : matched) cov += c;
    cov = 100.0 * cov / ref.size();

    double mmd = 0;
    for (const auto& r : ref) {
        double best = 1e300;
        for (const auto& g : gen) best = std::min(best, dd(g, r));
        mmd += best;
    }
    mmd /= ref.size();

    std::vector<const PointCloud*> all;
    std::vector<int> label;
    for (const auto& g : gen) {
        all.push_back(&g);
        label.push_back(0);
    }
    for (const auto& r : ref) {
        all.push_back(&r);
        label.push_back(1);
    }
    int correct = 0;
    for (size_t i = 0; i < all.size(); ++i) {
        double bd = 1e300;
        size_t best = 0;
        for (size_t j = 0; j < all.size(); ++j) {
            if (i == j) continue;
            double v = dd(*all[i], *all[j]);
            if (v < bd) {
                bd = v;
                best = j;
            }
        }
        if (label[i] == label[best]) ++correct;
    }
    double nna = 100.0 * correct / all.size();
    return {cov, mmd, nna};
}

} // namespace

TEST_CASE("chamfer basics") {
    PointCloud a{{{0, 0, 0}}};
    PointCloud b{{{1, 0, 0}}};
    CHECK(chamfer(a, a) == 0.0);
    CHECK(chamfer(a, b) == doctest::Approx(2.0)); // 1 + 1 under the squared convention

    RngStream rng(4);
    PointCloud p = random_cloud(64, rng), q = random_cloud(64, rng);
    CHECK(chamfer(p, q) == doctest::Approx(chamfer_oracle(p, q)).epsilon(1e-12));
    CHECK(chamfer(p, q) == doctest::Approx(chamfer(q, p)).epsilon(1e-12)); // symmetric
}

TEST_CASE("emd basics") {
    PointCloud a{{{0, 0, 0}, {1, 0, 0}}};
    PointCloud b{{{0, 0, 0}, {2, 0, 0}}};
    CHECK(emd_exact(a, a) == doctest::Approx(0.0));
    // optimal matching pairs 0->0 and 1->2, mean distance (0 + 1) / 2
    CHECK(emd_exact(a, b) == doctest::Approx(0.5));

    PointCloud c{{{0, 0, 0}}};
    CHECK_THROWS(emd_exact(a, c));
}

TEST_CASE("approximate emd tracks the exact solver") {
    RngStream rng(12);
    for (int trial = 0; trial < 10; ++trial) {
        PointCloud a = random_cloud(32, rng), b = random_cloud(32, rng);
        double exact = emd_exact(a, b);
        double eps = 0.0;
        double approx = emd_approx(a, b, &eps);
        CHECK(approx >= exact - 1e-9); // a matching can never beat the optimum
        CHECK(approx <= exact * 1.02);
        CHECK(eps > 0.0);
    }
}

TEST_CASE("identical sets: COV 100, MMD 0, 1-NNA 0") {
    RngStream rng(19);
    std::vector<PointCloud> set;
    for (int i = 0; i < 6; ++i)
        set.push_back(random_cloud(32, rng, {0.2 * i, 0, 0}, 0.1));
    for (SetDistance d : {SetDistance::cd, SetDistance::emd}) {
        SetMetrics m = set_metrics(set, set, d);
        CHECK(m.coverage_pct == doctest::Approx(100.0));
        CHECK(m.mmd == doctest::Approx(0.0));
        CHECK(m.nna_pct == doctest::Approx(0.0));
    }
}

TEST_CASE("far-separated clusters give 1-NNA 100") {
    RngStream rng(23);
    std::vector<PointCloud> gen, ref;
    for (int i = 0; i < 5; ++i) {
        gen.push_back(random_cloud(24, rng, {-4, 0, 0}, 0.2));
        ref.push_back(random_cloud(24, rng, {4, 0, 0}, 0.2));
    }
    SetMetrics m = set_metrics(gen, ref, SetDistance::cd);
    CHECK(m.nna_pct == doctest::Approx(100.0));
}

TEST_CASE("single gen cloud equal to one of three refs") {
    RngStream rng(31);
    std::vector<PointCloud> ref;
    for (int i = 0; i < 3; ++i) ref.push_back(random_cloud(16, rng, {0.5 * i, 0, 0}, 0.1));
    std::vector<PointCloud> gen = {ref[0]};
    SetMetrics m = set_metrics(gen, ref, SetDistance::cd);
    CHECK(m.coverage_pct == doctest::Approx(100.0 / 3.0));
    double expect_mmd = (0.0 + chamfer(gen[0], ref[1]) + chamfer(gen[0], ref[2])) / 3.0;
    CHECK(m.mmd == doctest::Approx(expect_mmd).epsilon(1e-12));
}

TEST_CASE("set metrics match the loop-literal oracle") {
    RngStream rng(37);
    std::vector<PointCloud> gen, ref;
    for (int i = 0; i < 5; ++i) gen.push_back(random_cloud(24, rng, {0.1 * i, 0.05, 0}, 0.25));
    for (int i = 0; i < 7; ++i) ref.push_back(random_cloud(24, rng, {0, 0.1 * i, 0.02}, 0.25));
    for (SetDistance d : {SetDistance::cd, SetDistance::emd}) {
        SetMetrics m = set_metrics(gen, ref, d);
        OracleSetMetrics o = set_metrics_oracle(gen, ref, d);
        CHECK(m.coverage_pct == doctest::Approx(o.cov).epsilon(1e-12));
        CHECK(m.mmd == doctest::Approx(o.mmd).epsilon(1e-12));
        CHECK(m.nna_pct == doctest::Approx(o.nna).epsilon(1e-12));
    }
}

TEST_CASE("1-NNA is invariant under swapping the two sets") {
    RngStream rng(53);
    std::vector<PointCloud> gen, ref;
    for (int i = 0; i < 4; ++i) gen.push_back(random_cloud(16, rng, {0.2, 0, 0}, 0.3));
    for (int i = 0; i < 6; ++i) ref.push_back(random_cloud(16, rng, {-0.2, 0, 0}, 0.3));
    SetMetrics ab = set_metrics(gen, ref, SetDistance::cd);
    SetMetrics ba = set_metrics(ref, gen, SetDistance::cd);
    CHECK(ab.nna_pct == doctest::Approx(ba.nna_pct).epsilon(1e-12));
}

TEST_CASE("rigid translation leaves every metric unchanged") {
    RngStream rng(41);
    std::vector<PointCloud> gen, ref;
    for (int i = 0; i < 4; ++i) gen.push_back(random_cloud(20, rng, {0.1 * i, 0, 0}, 0.2));
    for (int i = 0; i < 4; ++i) ref.push_back(random_cloud(20, rng, {0, 0.1 * i, 0}, 0.2));
    MetricReport before = evaluate_sets(gen, ref, 1);

    Vec3 shift{0.37, -0.21, 0.11};
    auto shifted = [&](std::vector<PointCloud> s) {
        for (auto& c : s)
            for (auto& p : c.points) p = p + shift;
        return s;
    };
    MetricReport after = evaluate_sets(shifted(gen), shifted(ref), 1);
    CHECK(after.cov_cd_pct == doctest::Approx(before.cov_cd_pct).epsilon(1e-9));
    CHECK(after.mmd_cd == doctest::Approx(before.mmd_cd).epsilon(1e-9));
    CHECK(after.nna_cd_pct == doctest::Approx(before.nna_cd_pct).epsilon(1e-9));
    CHECK(after.mmd_emd == doctest::Approx(before.mmd_emd).epsilon(1e-9));
}

TEST_CASE("report JSON carries conventions and scaling") {
    RngStream rng(43);
    std::vector<PointCloud> gen = {random_cloud(16, rng)}, ref = {random_cloud(16, rng)};
    MetricReport r = evaluate_sets(gen, ref, 9);
    CHECK(r.mmd_cd_scaled == doctest::Approx(r.mmd_cd * 1e3));
    CHECK(r.mmd_emd_scaled == doctest::Approx(r.mmd_emd * 1e2));
    std::string j = r.to_json();
    CHECK(j.find("cd_convention") != std::string::npos);
    CHECK(j.find("points_per_cloud") != std::string::npos);
}
