#include "wag3d/metrics/pointcloud_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wag3d/common.hpp"

#include <json.hpp>

namespace wag3d {

double chamfer(const PointCloud& a, const PointCloud& b) {
    a.validate();
    b.validate();
    auto one_way = [](const PointCloud& from, const PointCloud& to) {
        double acc = 0.0;
        for (const Vec3& p : from.points) {
            double best = 1e300;
            for (const Vec3& q : to.points) best = std::min(best, dist2(p, q));
            acc += best;
        }
        return acc / static_cast<double>(from.points.size());
    };
    return one_way(a, b) + one_way(b, a);
}

namespace {

std::vector<double> cost_matrix(const PointCloud& a, const PointCloud& b) {
    const size_t m = a.points.size();
    std::vector<double> cost(m * m);
    for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < m; ++j) cost[i * m + j] = dist(a.points[i], b.points[j]);
    return cost;
}

// Hungarian algorithm, shortest augmenting paths with potentials
double assignment_cost_exact(const std::vector<double>& cost, int m) {
    const double INF = 1e300;
    std::vector<double> u(static_cast<size_t>(m + 1)), v(static_cast<size_t>(m + 1));
    std::vector<int> match(static_cast<size_t>(m + 1), 0); // matched row per column, 1-based
    std::vector<int> way(static_cast<size_t>(m + 1), 0);
    for (int i = 1; i <= m; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<size_t>(m + 1), INF);
        std::vector<char> used(static_cast<size_t>(m + 1), 0);
        do {
            used[static_cast<size_t>(j0)] = 1;
            int i0 = match[static_cast<size_t>(j0)], j1 = 0;
            double delta = INF;
            for (int j = 1; j <= m; ++j) {
                if (used[static_cast<size_t>(j)]) continue;
                double cur = cost[static_cast<size_t>(i0 - 1) * m + (j - 1)] -
                             u[static_cast<size_t>(i0)] - v[static_cast<size_t>(j)];
                if (cur < minv[static_cast<size_t>(j)]) {
                    minv[static_cast<size_t>(j)] = cur;
                    way[static_cast<size_t>(j)] = j0;
                }
                if (minv[static_cast<size_t>(j)] < delta) {
                    delta = minv[static_cast<size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[static_cast<size_t>(j)]) {
                    u[static_cast<size_t>(match[static_cast<size_t>(j)])] += delta;
                    v[static_cast<size_t>(j)] -= delta;
                } else {
                    minv[static_cast<size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (match[static_cast<size_t>(j0)] != 0);
        do {
            int j1 = way[static_cast<size_t>(j0)];
            match[static_cast<size_t>(j0)] = match[static_cast<size_t>(j1)];
            j0 = j1;
        } while (j0);
    }
    double total = 0.0;
    for (int j = 1; j <= m; ++j)
        total += cost[static_cast<size_t>(match[static_cast<size_t>(j)] - 1) * m + (j - 1)];
    return total;
}

// Forward auction with epsilon scaling. The returned assignment cost is
// within m * eps_final of optimal.
double assignment_cost_auction(const std::vector<double>& cost, int m, double* eps_out) {
    double cmax = 0.0;
    for (double c : cost) cmax = std::max(cmax, c);
    if (cmax == 0.0) {
        if (eps_out) *eps_out = 0.0;
        return 0.0;
    }
    const double eps_final = 1e-3 * cmax / m;
    double eps = std::max(cmax / 2.0, eps_final);

    std::vector<int> owner(static_cast<size_t>(m), -1);   // row owning column j
    std::vector<int> assigned(static_cast<size_t>(m), -1); // column owned by row i
    std::vector<double> price(static_cast<size_t>(m), 0.0);

    while (true) {
        std::fill(owner.begin(), owner.end(), -1);
        std::fill(assigned.begin(), assigned.end(), -1);
        std::vector<int> queue(static_cast<size_t>(m));
        for (int i = 0; i < m; ++i) queue[static_cast<size_t>(i)] = i;
        size_t head = 0;
        std::vector<int> backlog;
        while (head < queue.size() || !backlog.empty()) {
            if (head == queue.size()) {
                queue.swap(backlog);
                backlog.clear();
                head = 0;
            }
            int i = queue[head++];
            // best and second-best value of -cost - price
            double best = -1e300, second = -1e300;
            int bestj = 0;
            for (int j = 0; j < m; ++j) {
                double val = -cost[static_cast<size_t>(i) * m + j] - price[static_cast<size_t>(j)];
                if (val > best) {
                    second = best;
                    best = val;
                    bestj = j;
                } else if (val > second) {
                    second = val;
                }
            }
            if (second == -1e300) second = best;
            price[static_cast<size_t>(bestj)] += best - second + eps;
            int prev = owner[static_cast<size_t>(bestj)];
            owner[static_cast<size_t>(bestj)] = i;
            assigned[static_cast<size_t>(i)] = bestj;
            if (prev >= 0) {
                assigned[static_cast<size_t>(prev)] = -1;
                backlog.push_back(prev);
            }
        }
        if (eps <= eps_final) break;
        eps = std::max(eps / 4.0, eps_final);
    }
    if (eps_out) *eps_out = eps;
    double total = 0.0;
    for (int i = 0; i < m; ++i) total += cost[static_cast<size_t>(i) * m + assigned[static_cast<size_t>(i)]];
    return total;
}

} // namespace

double emd_exact(const PointCloud& a, const PointCloud& b) {
    a.validate();
    b.validate();
    require(a.points.size() == b.points.size(), "EMD needs equal-size clouds, got ",
            a.points.size(), " and ", b.points.size());
    const int m = static_cast<int>(a.points.size());
    return assignment_cost_exact(cost_matrix(a, b), m) / m;
}

double emd_approx(const PointCloud& a, const PointCloud& b, double* eps_out) {
    a.validate();
    b.validate();
    require(a.points.size() == b.points.size(), "EMD needs equal-size clouds, got ",
            a.points.size(), " and ", b.points.size());
    const int m = static_cast<int>(a.points.size());
    return assignment_cost_auction(cost_matrix(a, b), m, eps_out) / m;
}

double emd(const PointCloud& a, const PointCloud& b) {
    return a.points.size() <= 256 ? emd_exact(a, b) : emd_approx(a, b);
}

namespace {

double cloud_distance(const PointCloud& a, const PointCloud& b, SetDistance d) {
    return d == SetDistance::cd ? chamfer(a, b) : emd(a, b);
}

} // namespace

SetMetrics set_metrics(const std::vector<PointCloud>& gen, const std::vector<PointCloud>& ref,
                       SetDistance distance) {
    require(!gen.empty() && !ref.empty(), "set metrics need non-empty sets");
    const size_t G = gen.size(), R = ref.size(), N = G + R;
    for (const auto& c : gen) require(c.points.size() == gen[0].points.size(),
                                      "clouds must have equal point counts");
    for (const auto& c : ref) require(c.points.size() == gen[0].points.size(),
                                      "clouds must have equal point counts");

    // one symmetric distance matrix over the union [gen..., ref...]
    auto cloud = [&](size_t i) -> const PointCloud& { return i < G ? gen[i] : ref[i - G]; };
    std::vector<double> d(N * N, 0.0);
    for (size_t i = 0; i < N; ++i)
        for (size_t j = i + 1; j < N; ++j) {
            double v = cloud_distance(cloud(i), cloud(j), distance);
            d[i * N + j] = v;
            d[j * N + i] = v;
        }

    // COV: distinct refs that are the nearest ref of at least one gen
    std::vector<char> covered(R, 0);
    for (size_t i = 0; i < G; ++i) {
        size_t best = 0;
        double bestd = d[i * N + G];
        for (size_t j = 1; j < R; ++j) {
            double v = d[i * N + (G + j)];
            if (v < bestd) {
                bestd = v;
                best = j;
            }
        }
        covered[best] = 1;
    }
    double cov = 0.0;
    for (char c : covered) cov += c;
    cov = 100.0 * cov / static_cast<double>(R);

    // MMD: mean over ref of the min distance to gen
    double mmd = 0.0;
    for (size_t j = 0; j < R; ++j) {
        double best = 1e300;
        for (size_t i = 0; i < G; ++i) best = std::min(best, d[(G + j) * N + i]);
        mmd += best;
    }
    mmd /= static_cast<double>(R);

    // 1-NNA: leave-one-out nearest neighbor over the union; ties break to the
    // lowest union index (gen block first)
    size_t correct = 0;
    for (size_t i = 0; i < N; ++i) {
        size_t best = N;
        double bestd = 1e300;
        for (size_t j = 0; j < N; ++j) {
            if (j == i) continue;
            if (d[i * N + j] < bestd) {
                bestd = d[i * N + j];
                best = j;
            }
        }
        bool same = (i < G) == (best < G);
        if (same) ++correct;
    }
    double nna = 100.0 * static_cast<double>(correct) / static_cast<double>(N);

    return {cov, mmd, nna};
}

MetricReport evaluate_sets(const std::vector<PointCloud>& gen,
                           const std::vector<PointCloud>& ref, uint64_t seed) {
    MetricReport report;
    SetMetrics cd = set_metrics(gen, ref, SetDistance::cd);
    SetMetrics em = set_metrics(gen, ref, SetDistance::emd);
    report.cov_cd_pct = cd.coverage_pct;
    report.cov_emd_pct = em.coverage_pct;
    report.mmd_cd = cd.mmd;
    report.mmd_emd = em.mmd;
    report.mmd_cd_scaled = cd.mmd * 1e3;
    report.mmd_emd_scaled = em.mmd * 1e2;
    report.nna_cd_pct = cd.nna_pct;
    report.nna_emd_pct = em.nna_pct;
    report.n_gen = static_cast<int>(gen.size());
    report.n_ref = static_cast<int>(ref.size());
    report.points_per_cloud = static_cast<int>(gen[0].points.size());
    report.seed = seed;
    return report;
}

std::string MetricReport::to_json() const {
    nlohmann::ordered_json j;
    j["cov_cd_pct"] = cov_cd_pct;
    j["cov_emd_pct"] = cov_emd_pct;
    j["mmd_cd"] = mmd_cd;
    j["mmd_emd"] = mmd_emd;
    j["mmd_cd_scaled_1e3"] = mmd_cd_scaled;
    j["mmd_emd_scaled_1e2"] = mmd_emd_scaled;
    j["nna_cd_pct"] = nna_cd_pct;
    j["nna_emd_pct"] = nna_emd_pct;
    j["n_gen"] = n_gen;
    j["n_ref"] = n_ref;
    j["points_per_cloud"] = points_per_cloud;
    j["seed"] = seed;
    j["cd_convention"] = cd_convention;
    j["emd_convention"] = emd_convention;
    return j.dump(2);
}

} // namespace wag3d
