#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wag3d/geometry/vec3.hpp"

namespace wag3d {

// Cubic signed-distance grid over [-0.5, 0.5]^3. Values are clamped to the
// truncation band [-tau, tau], negative inside the shape. Storage is f32 in
// x-fastest order (index = ix + n*(iy + n*iz)), matching the W3DG payload.
struct DistanceGrid {
    int n = 0;
    double spacing = 0.0; // = 1/n in object units
    double truncation = 0.0;
    std::vector<float> values;

    DistanceGrid() = default;
    DistanceGrid(int n_, double tau);

    int64_t index(int ix, int iy, int iz) const {
        return static_cast<int64_t>(ix) + static_cast<int64_t>(n) * (iy + static_cast<int64_t>(n) * iz);
    }
    float at(int ix, int iy, int iz) const { return values[static_cast<size_t>(index(ix, iy, iz))]; }
    float& at(int ix, int iy, int iz) { return values[static_cast<size_t>(index(ix, iy, iz))]; }

    Vec3 voxel_center(int ix, int iy, int iz) const {
        return {-0.5 + (ix + 0.5) * spacing, -0.5 + (iy + 0.5) * spacing, -0.5 + (iz + 0.5) * spacing};
    }

    // invariants: n^3 finite values, |v| <= truncation
    void validate() const;
};

void save_w3dg(const std::string& path, const DistanceGrid& grid);
DistanceGrid load_w3dg(const std::string& path);

} // namespace wag3d
