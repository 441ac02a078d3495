#include "wag3d/geometry/mesh.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "wag3d/common.hpp"

namespace wag3d {

void TriangleMesh::validate() const {
    const int nv = static_cast<int>(vertices.size());
    for (const Vec3& v : vertices) {
        for (double c : v) {
            require(std::isfinite(c), "non-finite vertex coordinate");
            require(std::abs(c) <= 0.5 + 1e-9, "vertex coordinate ", c, " outside [-0.5, 0.5]");
        }
    }
    for (const auto& f : faces) {
        for (int i : f) require(i >= 0 && i < nv, "face index ", i, " out of range (", nv, " vertices)");
    }
}

double TriangleMesh::total_area() const {
    double area = 0.0;
    for (const auto& f : faces) {
        const Vec3& a = vertices[static_cast<size_t>(f[0])];
        const Vec3& b = vertices[static_cast<size_t>(f[1])];
        const Vec3& c = vertices[static_cast<size_t>(f[2])];
        area += 0.5 * norm(cross(b - a, c - a));
    }
    return area;
}

bool TriangleMesh::is_watertight(std::string* why) const {
    // directed half-edge counts; a closed orientable mesh has every directed
    // edge exactly once and its reverse exactly once
    std::map<std::pair<int, int>, int> count;
    for (const auto& f : faces) {
        for (int e = 0; e < 3; ++e) {
            int a = f[e], b = f[(e + 1) % 3];
            if (a == b) {
                if (why) *why = "degenerate face with repeated vertex";
                return false;
            }
            if (++count[{a, b}] > 1) {
                if (why) {
                    std::ostringstream os;
                    os << "directed edge (" << a << "," << b << ") used more than once";
                    *why = os.str();
                }
                return false;
            }
        }
    }
    for (const auto& [edge, c] : count) {
        auto rev = count.find({edge.second, edge.first});
        if (rev == count.end()) {
            if (why) {
                std::ostringstream os;
                os << "boundary edge (" << edge.first << "," << edge.second << ") has no opposite";
                *why = os.str();
            }
            return false;
        }
    }
    return true;
}

long TriangleMesh::euler_characteristic() const {
    std::set<std::pair<int, int>> edges;
    std::set<int> used;
    for (const auto& f : faces) {
        for (int e = 0; e < 3; ++e) {
            int a = f[e], b = f[(e + 1) % 3];
            edges.insert({std::min(a, b), std::max(a, b)});
        }
        used.insert(f.begin(), f.end());
    }
    return static_cast<long>(used.size()) - static_cast<long>(edges.size()) +
           static_cast<long>(faces.size());
}

void PointCloud::validate() const {
    require(!points.empty(), "empty point cloud");
    for (const Vec3& p : points)
        for (double c : p) require(std::isfinite(c), "non-finite point coordinate");
}

void save_obj(const std::string& path, const TriangleMesh& mesh) {
    std::ofstream os(path);
    require(os.good(), "cannot open ", path, " for writing");
    char buf[128];
    for (const Vec3& v : mesh.vertices) {
        std::snprintf(buf, sizeof(buf), "v %.9g %.9g %.9g\n", v[0], v[1], v[2]);
        os << buf;
    }
    for (const auto& f : mesh.faces) {
        os << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
    }
    require(os.good(), "write failed for ", path);
}

TriangleMesh load_obj(const std::string& path) {
    std::ifstream is(path);
    require(is.good(), "cannot open ", path);
    TriangleMesh mesh;
    std::string line;
    while (std::getline(is, line)) {
        if (line.size() < 2) continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "v") {
            Vec3 v;
            ls >> v[0] >> v[1] >> v[2];
            require(!ls.fail(), "malformed vertex record: ", line);
            mesh.vertices.push_back(v);
        } else if (tag == "f") {
            std::array<int, 3> f{};
            for (int i = 0; i < 3; ++i) {
                std::string tok;
                ls >> tok;
                require(!ls.fail(), "malformed face record: ", line);
                // accept i, i/t, i/t/n, i//n forms; only the vertex index is used
                size_t slash = tok.find('/');
                int idx = std::stoi(slash == std::string::npos ? tok : tok.substr(0, slash));
                require(idx >= 1, "face indices must be positive, got ", idx);
                f[static_cast<size_t>(i)] = idx - 1;
            }
            std::string extra;
            require(!(ls >> extra), "only triangles are supported: ", line);
            mesh.faces.push_back(f);
        }
    }
    mesh.validate();
    return mesh;
}

} // namespace wag3d
