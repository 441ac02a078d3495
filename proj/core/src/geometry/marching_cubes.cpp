#include "wag3d/geometry/marching_cubes.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "wag3d/common.hpp"

namespace wag3d {

namespace {

// corner c of a cell = offset ((c&1), ((c>>1)&1), ((c>>2)&1)) in voxels
// edge ids: 0-3 along x, 4-7 along y, 8-11 along z
struct EdgeDef {
    int axis;
    int off[3]; // lower-corner offset within the cell
};

constexpr EdgeDef kEdges[12] = {
    {0, {0, 0, 0}}, {0, {0, 1, 0}}, {0, {0, 0, 1}}, {0, {0, 1, 1}},
    {1, {0, 0, 0}}, {1, {1, 0, 0}}, {1, {0, 0, 1}}, {1, {1, 0, 1}},
    {2, {0, 0, 0}}, {2, {1, 0, 0}}, {2, {0, 1, 0}}, {2, {1, 1, 0}},
};

// faces with corners listed counterclockwise seen from outside the cell;
// edge[i] joins corner[i] and corner[(i+1)%4]
struct FaceDef {
    int corner[4];
    int edge[4];
};

constexpr FaceDef kFaces[6] = {
    {{0, 4, 6, 2}, {8, 6, 10, 4}},  // -x
    {{1, 3, 7, 5}, {5, 11, 7, 9}},  // +x
    {{0, 1, 5, 4}, {0, 9, 2, 8}},   // -y
    {{2, 6, 7, 3}, {10, 3, 11, 1}}, // +y
    {{0, 2, 3, 1}, {4, 1, 5, 0}},   // -z
    {{4, 5, 7, 6}, {2, 7, 3, 6}},   // +z
};

struct Segment {
    int from, to; // local edge ids
};

// Marching squares on one face. w[i] are corner values minus iso in the
// face's ccw order; the inside region (w < 0) lies to the left of each
// directed segment when the face is seen from outside the cell.
int face_segments(const double w[4], const int e[4], Segment out[2]) {
    int mask = 0;
    for (int i = 0; i < 4; ++i)
        if (w[i] < 0.0) mask |= 1 << i;
    switch (mask) {
        case 0:
        case 15:
            return 0;
        // one inside corner i: hug it
        case 1: out[0] = {e[0], e[3]}; return 1;
        case 2: out[0] = {e[1], e[0]}; return 1;
        case 4: out[0] = {e[2], e[1]}; return 1;
        case 8: out[0] = {e[3], e[2]}; return 1;
        // one outside corner i: hug it the other way round
        case 14: out[0] = {e[3], e[0]}; return 1;
        case 13: out[0] = {e[0], e[1]}; return 1;
        case 11: out[0] = {e[1], e[2]}; return 1;
        case 7: out[0] = {e[2], e[3]}; return 1;
        // two adjacent inside corners: one segment across the strip
        case 3: out[0] = {e[1], e[3]}; return 1;
        case 6: out[0] = {e[2], e[0]}; return 1;
        case 12: out[0] = {e[3], e[1]}; return 1;
        case 9: out[0] = {e[0], e[2]}; return 1;
        // diagonal cases: asymptotic decider on the bilinear saddle value
        case 5:
        case 10: {
            double den = w[0] + w[2] - w[1] - w[3];
            double saddle = den == 0.0 ? 0.0 : (w[0] * w[2] - w[1] * w[3]) / den;
            bool connect_inside = saddle < 0.0;
            if (mask == 5) { // corners 0,2 inside
                if (connect_inside) {
                    out[0] = {e[0], e[1]};
                    out[1] = {e[2], e[3]};
                } else {
                    out[0] = {e[0], e[3]};
                    out[1] = {e[2], e[1]};
                }
            } else { // corners 1,3 inside
                if (connect_inside) {
                    out[0] = {e[3], e[0]};
                    out[1] = {e[1], e[2]};
                } else {
                    out[0] = {e[1], e[0]};
                    out[1] = {e[3], e[2]};
                }
            }
            return 2;
        }
    }
    return 0;
}

} // namespace

TriangleMesh marching_cubes(const DistanceGrid& grid, double iso) {
    grid.validate();
    require(std::abs(iso) < grid.truncation, "iso level ", iso,
            " must lie strictly inside the truncation band (-", grid.truncation, ", ",
            grid.truncation, ")");

    const int n = grid.n;
    bool any_inside = false, any_outside = false;
    for (float v : grid.values) {
        (v < iso ? any_inside : any_outside) = true;
        if (any_inside && any_outside) break;
    }
    require(any_inside && any_outside,
            "empty iso-surface: grid lies entirely on one side of iso=", iso);

    TriangleMesh mesh;
    std::unordered_map<uint64_t, int> vertex_of_edge;
    vertex_of_edge.reserve(1024);

    // global key of the cut edge (axis, lower corner voxel)
    auto edge_key = [&](int axis, int i, int j, int k) {
        return (static_cast<uint64_t>((k * n + j) * n + i)) * 3u + static_cast<uint64_t>(axis);
    };

    auto edge_vertex = [&](int ci, int cj, int ck, int local_edge) {
        const EdgeDef& ed = kEdges[local_edge];
        int i = ci + ed.off[0], j = cj + ed.off[1], k = ck + ed.off[2];
        uint64_t key = edge_key(ed.axis, i, j, k);
        auto it = vertex_of_edge.find(key);
        if (it != vertex_of_edge.end()) return it->second;
        double v0 = grid.at(i, j, k);
        double v1 = grid.at(i + (ed.axis == 0), j + (ed.axis == 1), k + (ed.axis == 2));
        double t = (iso - v0) / (v1 - v0);
        // exact corner hits would weld vertices from different edges together
        t = std::clamp(t, 1e-6, 1.0 - 1e-6);
        Vec3 p = grid.voxel_center(i, j, k);
        p[static_cast<size_t>(ed.axis)] += t * grid.spacing;
        int idx = static_cast<int>(mesh.vertices.size());
        mesh.vertices.push_back(p);
        vertex_of_edge.emplace(key, idx);
        return idx;
    };

    double w[8];
    Segment segs[12];
    int next_from[12]; // segment target indexed by start edge
    int loop[12];

    for (int ck = 0; ck < n - 1; ++ck) {
        for (int cj = 0; cj < n - 1; ++cj) {
            for (int ci = 0; ci < n - 1; ++ci) {
                int cube_mask = 0;
                for (int c = 0; c < 8; ++c) {
                    w[c] = static_cast<double>(
                               grid.at(ci + (c & 1), cj + ((c >> 1) & 1), ck + ((c >> 2) & 1))) -
                           iso;
                    if (w[c] < 0.0) cube_mask |= 1 << c;
                }
                if (cube_mask == 0 || cube_mask == 255) continue;

                int nseg = 0;
                for (const FaceDef& f : kFaces) {
                    double fw[4] = {w[f.corner[0]], w[f.corner[1]], w[f.corner[2]], w[f.corner[3]]};
                    Segment local[2];
                    int c = face_segments(fw, f.edge, local);
                    for (int s = 0; s < c; ++s) segs[nseg++] = local[s];
                }
                if (nseg == 0) continue;

                std::fill(std::begin(next_from), std::end(next_from), -1);
                for (int s = 0; s < nseg; ++s) {
                    require(next_from[segs[s].from] == -1, "marching cubes: non-manifold cell trace");
                    next_from[segs[s].from] = segs[s].to;
                }

                // trace closed loops over the cell boundary, lowest edge first
                for (int start = 0; start < 12; ++start) {
                    if (next_from[start] < 0) continue;
                    int len = 0;
                    int e = start;
                    do {
                        loop[len++] = e;
                        int nxt = next_from[e];
                        require(nxt >= 0, "marching cubes: open contour in cell trace");
                        next_from[e] = -1;
                        e = nxt;
                    } while (e != start);
                    require(len >= 3, "marching cubes: degenerate contour");
                    int v0 = edge_vertex(ci, cj, ck, loop[0]);
                    int prev = edge_vertex(ci, cj, ck, loop[1]);
                    for (int t = 2; t < len; ++t) {
                        int cur = edge_vertex(ci, cj, ck, loop[t]);
                        if (v0 != prev && prev != cur && cur != v0)
                            mesh.faces.push_back({v0, prev, cur});
                        prev = cur;
                    }
                }
            }
        }
    }

    require(!mesh.faces.empty(), "empty iso-surface: no cell crossings at iso=", iso);
    mesh.validate();
    return mesh;
}

} // namespace wag3d
