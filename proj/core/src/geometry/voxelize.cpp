#include "wag3d/geometry/voxelize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "wag3d/common.hpp"

namespace wag3d {

namespace {

// closest point on triangle (Ericson, Real-Time Collision Detection)
double point_triangle_dist2(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    Vec3 ab = b - a, ac = c - a, ap = p - a;
    double d1 = dot(ab, ap), d2 = dot(ac, ap);
    if (d1 <= 0.0 && d2 <= 0.0) return dist2(p, a);

    Vec3 bp = p - b;
    double d3 = dot(ab, bp), d4 = dot(ac, bp);
    if (d3 >= 0.0 && d4 <= d3) return dist2(p, b);

    double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        double v = d1 / (d1 - d3);
        return dist2(p, a + ab * v);
    }

    Vec3 cp = p - c;
    double d5 = dot(ab, cp), d6 = dot(ac, cp);
    if (d6 >= 0.0 && d5 <= d6) return dist2(p, c);

    double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        double w = d2 / (d2 - d6);
        return dist2(p, a + ac * w);
    }

    double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return dist2(p, b + (c - b) * w);
    }

    double denom = 1.0 / (va + vb + vc);
    double v = vb * denom, w = vc * denom;
    return dist2(p, a + ab * v + ac * w);
}

struct BvhNode {
    Vec3 lo, hi;
    int left = -1, right = -1; // children, or leaf when left < 0
    int begin = 0, end = 0;    // triangle range for leaves
};

struct Bvh {
    const TriangleMesh* mesh = nullptr;
    std::vector<BvhNode> nodes;
    std::vector<int> order; // triangle ids grouped by leaf

    int build(std::vector<int>& tris, std::vector<Vec3>& centroids, int begin, int end) {
        BvhNode node;
        node.lo = {1e30, 1e30, 1e30};
        node.hi = {-1e30, -1e30, -1e30};
        for (int t = begin; t < end; ++t) {
            for (int v = 0; v < 3; ++v) {
                const Vec3& p = mesh->vertices[static_cast<size_t>(mesh->faces[static_cast<size_t>(tris[static_cast<size_t>(t)])][static_cast<size_t>(v)])];
                for (int ax = 0; ax < 3; ++ax) {
                    node.lo[static_cast<size_t>(ax)] = std::min(node.lo[static_cast<size_t>(ax)], p[static_cast<size_t>(ax)]);
                    node.hi[static_cast<size_t>(ax)] = std::max(node.hi[static_cast<size_t>(ax)], p[static_cast<size_t>(ax)]);
                }
            }
        }
        int idx = static_cast<int>(nodes.size());
        nodes.push_back(node);
        if (end - begin <= 4) {
            nodes[static_cast<size_t>(idx)].begin = begin;
            nodes[static_cast<size_t>(idx)].end = end;
            return idx;
        }
        Vec3 extent = node.hi - node.lo;
        int axis = 0;
        if (extent[1] > extent[0]) axis = 1;
        if (extent[2] > extent[static_cast<size_t>(axis)]) axis = 2;
        int mid = (begin + end) / 2;
        std::nth_element(tris.begin() + begin, tris.begin() + mid, tris.begin() + end,
                         [&](int l, int r) {
                             if (centroids[static_cast<size_t>(l)][static_cast<size_t>(axis)] != centroids[static_cast<size_t>(r)][static_cast<size_t>(axis)])
                                 return centroids[static_cast<size_t>(l)][static_cast<size_t>(axis)] < centroids[static_cast<size_t>(r)][static_cast<size_t>(axis)];
                             return l < r; // total order keeps the build deterministic
                         });
        int left = build(tris, centroids, begin, mid);
        int right = build(tris, centroids, mid, end);
        nodes[static_cast<size_t>(idx)].left = left;
        nodes[static_cast<size_t>(idx)].right = right;
        return idx;
    }

    static Bvh make(const TriangleMesh& mesh) {
        Bvh bvh;
        bvh.mesh = &mesh;
        int nt = static_cast<int>(mesh.faces.size());
        bvh.order.resize(static_cast<size_t>(nt));
        std::iota(bvh.order.begin(), bvh.order.end(), 0);
        std::vector<Vec3> centroids(static_cast<size_t>(nt));
        for (int t = 0; t < nt; ++t) {
            const auto& f = mesh.faces[static_cast<size_t>(t)];
            centroids[static_cast<size_t>(t)] =
                (mesh.vertices[static_cast<size_t>(f[0])] + mesh.vertices[static_cast<size_t>(f[1])] + mesh.vertices[static_cast<size_t>(f[2])]) * (1.0 / 3.0);
        }
        bvh.nodes.reserve(static_cast<size_t>(2 * nt));
        bvh.build(bvh.order, centroids, 0, nt);
        return bvh;
    }

    static double box_dist2(const BvhNode& node, const Vec3& p) {
        double d2 = 0.0;
        for (int ax = 0; ax < 3; ++ax) {
            double v = p[static_cast<size_t>(ax)];
            double d = std::max({node.lo[static_cast<size_t>(ax)] - v, 0.0, v - node.hi[static_cast<size_t>(ax)]});
            d2 += d * d;
        }
        return d2;
    }

    // unsigned distance, early-out at cap
    double distance(const Vec3& p, double cap) const {
        double best2 = cap * cap;
        int stack[64];
        int top = 0;
        stack[top++] = 0;
        while (top > 0) {
            const BvhNode& node = nodes[static_cast<size_t>(stack[--top])];
            if (box_dist2(node, p) >= best2) continue;
            if (node.left < 0) {
                for (int t = node.begin; t < node.end; ++t) {
                    const auto& f = mesh->faces[static_cast<size_t>(order[static_cast<size_t>(t)])];
                    double d2 = point_triangle_dist2(p, mesh->vertices[static_cast<size_t>(f[0])],
                                                     mesh->vertices[static_cast<size_t>(f[1])],
                                                     mesh->vertices[static_cast<size_t>(f[2])]);
                    best2 = std::min(best2, d2);
                }
            } else {
                // nearer child first
                double dl = box_dist2(nodes[static_cast<size_t>(node.left)], p);
                double dr = box_dist2(nodes[static_cast<size_t>(node.right)], p);
                if (dl < dr) {
                    stack[top++] = node.right;
                    stack[top++] = node.left;
                } else {
                    stack[top++] = node.left;
                    stack[top++] = node.right;
                }
            }
        }
        return std::sqrt(best2);
    }
};

} // namespace

DistanceGrid voxelize_sdf(const TriangleMesh& mesh, int n, double tau) {
    mesh.validate();
    require(n >= 8, "resolution must be >= 8, got ", n);
    require(!mesh.faces.empty(), "cannot voxelize an empty mesh");
    std::string why;
    require(mesh.is_watertight(&why), "non-watertight mesh (sign undefined): ", why);

    DistanceGrid grid(n, tau);
    require(tau >= 2.0 * grid.spacing, "truncation ", tau, " below 2*spacing at n=", n);
    Bvh bvh = Bvh::make(mesh);

    // fixed sub-voxel jitter keeps parity rays off edges and vertices
    const double jy = 0.5700439718e-4 * grid.spacing;
    const double jz = 0.3319921135e-4 * grid.spacing;

    // bin triangles over (y, z) so each row only tests overlapping ones
    std::vector<std::vector<int>> bins(static_cast<size_t>(n) * n);
    for (int t = 0; t < static_cast<int>(mesh.faces.size()); ++t) {
        const auto& f = mesh.faces[static_cast<size_t>(t)];
        double ylo = 1e30, yhi = -1e30, zlo = 1e30, zhi = -1e30;
        for (int v = 0; v < 3; ++v) {
            const Vec3& p = mesh.vertices[static_cast<size_t>(f[static_cast<size_t>(v)])];
            ylo = std::min(ylo, p[1]);
            yhi = std::max(yhi, p[1]);
            zlo = std::min(zlo, p[2]);
            zhi = std::max(zhi, p[2]);
        }
        auto to_bin = [&](double c) {
            return std::clamp(static_cast<int>(std::floor((c + 0.5) * n)), 0, n - 1);
        };
        for (int bz = to_bin(zlo); bz <= to_bin(zhi); ++bz)
            for (int by = to_bin(ylo); by <= to_bin(yhi); ++by)
                bins[static_cast<size_t>(bz) * n + by].push_back(t);
    }

    std::vector<double> crossings;
    for (int iz = 0; iz < n; ++iz) {
        for (int iy = 0; iy < n; ++iy) {
            Vec3 row0 = grid.voxel_center(0, iy, iz);
            const double py = row0[1] + jy;
            const double pz = row0[2] + jz;

            crossings.clear();
            for (int t : bins[static_cast<size_t>(iz) * n + iy]) {
                const auto& f = mesh.faces[static_cast<size_t>(t)];
                const Vec3& a = mesh.vertices[static_cast<size_t>(f[0])];
                const Vec3& b = mesh.vertices[static_cast<size_t>(f[1])];
                const Vec3& c = mesh.vertices[static_cast<size_t>(f[2])];
                // barycentric containment in the (y, z) projection
                double den = (b[1] - a[1]) * (c[2] - a[2]) - (b[2] - a[2]) * (c[1] - a[1]);
                if (den == 0.0) continue; // edge-on to x
                double u = ((py - a[1]) * (c[2] - a[2]) - (pz - a[2]) * (c[1] - a[1])) / den;
                double v = ((b[1] - a[1]) * (pz - a[2]) - (b[2] - a[2]) * (py - a[1])) / den;
                if (u < 0.0 || v < 0.0 || u + v > 1.0) continue;
                crossings.push_back(a[0] + u * (b[0] - a[0]) + v * (c[0] - a[0]));
            }
            std::sort(crossings.begin(), crossings.end());

            size_t next = 0;
            bool inside = false;
            for (int ix = 0; ix < n; ++ix) {
                double px = row0[0] + ix * grid.spacing;
                while (next < crossings.size() && crossings[next] < px) {
                    inside = !inside;
                    ++next;
                }
                double d = bvh.distance({px, py, pz}, tau);
                double sd = inside ? -d : d;
                grid.at(ix, iy, iz) = static_cast<float>(std::clamp(sd, -tau, tau));
            }
        }
    }
    return grid;
}

} // namespace wag3d
