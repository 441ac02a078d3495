#pragma once

#include <array>
#include <string>
#include <vector>

#include "wag3d/geometry/vec3.hpp"

namespace wag3d {

struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;

    // invariants: indices in range, finite coordinates, bbox in [-0.5, 0.5]^3
    void validate() const;

    double total_area() const;

    // true when every undirected edge is shared by exactly two faces with
    // opposite orientation (closed orientable surface)
    bool is_watertight(std::string* why = nullptr) const;

    // V - E + F over the welded mesh (2 for a sphere-like surface)
    long euler_characteristic() const;
};

struct PointCloud {
    std::vector<Vec3> points;

    void validate() const;
};

// ASCII OBJ restricted to v/f records; f entries may carry /vt/vn suffixes on
// read, only plain triples are written.
void save_obj(const std::string& path, const TriangleMesh& mesh);
TriangleMesh load_obj(const std::string& path);

} // namespace wag3d
