#pragma once

#include <string>
#include <vector>

#include "wag3d/geometry/grid.hpp"
#include "wag3d/geometry/vec3.hpp"
#include "wag3d/rng.hpp"

namespace wag3d {

enum class PrimitiveKind {
    sphere,         // params: radius
    box,            // params: hx, hy, hz (half extents)
    torus,          // params: major radius R, minor radius r (axis = z)
    capsule,        // params: half length h (along y), radius r
    superellipsoid, // params: radius r, exponent p >= 2; field is |x|_p - r
    union_of_two,   // params: r1, c1x, c1y, c1z, r2, c2x, c2y, c2z (two spheres)
};

PrimitiveKind primitive_kind_from_string(const std::string& name);
const char* primitive_kind_name(PrimitiveKind kind);
int primitive_param_count(PrimitiveKind kind);

// Procedural stand-in for a dataset category: one analytic primitive plus a
// class label. All fields stay 1-Lipschitz (the superellipsoid uses the p-norm
// level set, exact only at p=2; the union uses the min bound), so the eikonal
// property holds for every kind.
struct ProceduralSpec {
    PrimitiveKind kind = PrimitiveKind::sphere;
    std::vector<double> params;
    int class_id = 0;

    void validate(int num_classes = -1) const;

    // signed distance (or 1-Lipschitz distance bound) at p, before clamping
    double evaluate(const Vec3& p) const;

    // random spec of the given kind with parameters inside documented ranges
    static ProceduralSpec sample(PrimitiveKind kind, int class_id, RngStream& rng);
};

// Evaluates the spec at every voxel center, clamped to [-tau, tau].
DistanceGrid procedural_sdf(const ProceduralSpec& spec, int n, double tau);

} // namespace wag3d
