#include "wag3d/geometry/sample_points.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wag3d/common.hpp"
#include "wag3d/rng.hpp"

namespace wag3d {

PointCloud sample_surface_points(const TriangleMesh& mesh, int count, uint64_t seed) {
    mesh.validate();
    require(count > 0, "sample count must be positive, got ", count);

    std::vector<int> order(mesh.faces.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int l, int r) {
        return mesh.faces[static_cast<size_t>(l)] < mesh.faces[static_cast<size_t>(r)];
    });

    std::vector<double> cum(order.size());
    double total = 0.0;
    for (size_t i = 0; i < order.size(); ++i) {
        const auto& f = mesh.faces[static_cast<size_t>(order[i])];
        const Vec3& a = mesh.vertices[static_cast<size_t>(f[0])];
        const Vec3& b = mesh.vertices[static_cast<size_t>(f[1])];
        const Vec3& c = mesh.vertices[static_cast<size_t>(f[2])];
        total += 0.5 * norm(cross(b - a, c - a));
        cum[i] = total;
    }
    require(total > 0.0, "degenerate mesh: total surface area is zero");

    RngStream rng = RngStream::derive(seed, "surface-sample");
    PointCloud cloud;
    cloud.points.reserve(static_cast<size_t>(count));
    for (int s = 0; s < count; ++s) {
        double target = rng.uniform() * total;
        size_t pick = static_cast<size_t>(
            std::upper_bound(cum.begin(), cum.end(), target) - cum.begin());
        if (pick >= cum.size()) pick = cum.size() - 1;
        const auto& f = mesh.faces[static_cast<size_t>(order[pick])];
        const Vec3& a = mesh.vertices[static_cast<size_t>(f[0])];
        const Vec3& b = mesh.vertices[static_cast<size_t>(f[1])];
        const Vec3& c = mesh.vertices[static_cast<size_t>(f[2])];
        double r1 = std::sqrt(rng.uniform());
        double r2 = rng.uniform();
        cloud.points.push_back(a * (1.0 - r1) + b * (r1 * (1.0 - r2)) + c * (r1 * r2));
    }
    return cloud;
}

} // namespace wag3d
