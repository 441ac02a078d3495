#include "wag3d/geometry/sdf.hpp"

#include <algorithm>
#include <cmath>

#include "wag3d/common.hpp"

namespace wag3d {

PrimitiveKind primitive_kind_from_string(const std::string& name) {
    if (name == "sphere") return PrimitiveKind::sphere;
    if (name == "box") return PrimitiveKind::box;
    if (name == "torus") return PrimitiveKind::torus;
    if (name == "capsule") return PrimitiveKind::capsule;
    if (name == "superellipsoid") return PrimitiveKind::superellipsoid;
    if (name == "union-of-two") return PrimitiveKind::union_of_two;
    fail("unknown primitive kind '", name, "'");
}

const char* primitive_kind_name(PrimitiveKind kind) {
    switch (kind) {
        case PrimitiveKind::sphere: return "sphere";
        case PrimitiveKind::box: return "box";
        case PrimitiveKind::torus: return "torus";
        case PrimitiveKind::capsule: return "capsule";
        case PrimitiveKind::superellipsoid: return "superellipsoid";
        case PrimitiveKind::union_of_two: return "union-of-two";
    }
    fail("invalid primitive kind");
}

int primitive_param_count(PrimitiveKind kind) {
    switch (kind) {
        case PrimitiveKind::sphere: return 1;
        case PrimitiveKind::box: return 3;
        case PrimitiveKind::torus: return 2;
        case PrimitiveKind::capsule: return 2;
        case PrimitiveKind::superellipsoid: return 2;
        case PrimitiveKind::union_of_two: return 8;
    }
    fail("invalid primitive kind");
}

// Documented parameter ranges. Shapes must fit inside [-0.5, 0.5]^3 with a
// little margin so iso-surfaces never touch the grid boundary.
void ProceduralSpec::validate(int num_classes) const {
    require(static_cast<int>(params.size()) == primitive_param_count(kind),
            primitive_kind_name(kind), " expects ", primitive_param_count(kind),
            " parameters, got ", params.size());
    for (double p : params) require(std::isfinite(p), "non-finite parameter");
    require(class_id >= 0, "negative class id");
    if (num_classes >= 0) require(class_id < num_classes, "class id ", class_id, " out of range");

    auto in = [&](double v, double lo, double hi) {
        require(v >= lo && v <= hi, primitive_kind_name(kind), " parameter ", v,
                " outside range [", lo, ", ", hi, "]");
    };
    switch (kind) {
        case PrimitiveKind::sphere:
            in(params[0], 0.05, 0.45);
            break;
        case PrimitiveKind::box:
            for (int i = 0; i < 3; ++i) in(params[i], 0.05, 0.45);
            break;
        case PrimitiveKind::torus:
            in(params[0], 0.10, 0.35);
            in(params[1], 0.02, 0.12);
            require(params[0] + params[1] <= 0.45, "torus exceeds unit box");
            require(params[1] < params[0], "torus minor radius must be below major");
            break;
        case PrimitiveKind::capsule:
            in(params[0], 0.05, 0.35);
            in(params[1], 0.03, 0.20);
            require(params[0] + params[1] <= 0.45, "capsule exceeds unit box");
            break;
        case PrimitiveKind::superellipsoid:
            in(params[0], 0.05, 0.40);
            in(params[1], 2.0, 8.0);
            break;
        case PrimitiveKind::union_of_two:
            for (int s = 0; s < 2; ++s) {
                double r = params[s * 4];
                in(r, 0.05, 0.30);
                for (int i = 1; i <= 3; ++i) in(params[s * 4 + i], -0.2, 0.2);
                Vec3 c{params[s * 4 + 1], params[s * 4 + 2], params[s * 4 + 3]};
                require(norm(c) + r <= 0.45, "union sphere exceeds unit box");
            }
            break;
    }
}

static double sd_sphere(const Vec3& p, double r) { return norm(p) - r; }

static double sd_box(const Vec3& p, double hx, double hy, double hz) {
    Vec3 q{std::abs(p[0]) - hx, std::abs(p[1]) - hy, std::abs(p[2]) - hz};
    Vec3 qp{std::max(q[0], 0.0), std::max(q[1], 0.0), std::max(q[2], 0.0)};
    double outside = norm(qp);
    double inside = std::min(std::max(q[0], std::max(q[1], q[2])), 0.0);
    return outside + inside;
}

static double sd_torus(const Vec3& p, double R, double r) {
    double ring = std::sqrt(p[0] * p[0] + p[1] * p[1]) - R;
    return std::sqrt(ring * ring + p[2] * p[2]) - r;
}

static double sd_capsule(const Vec3& p, double h, double r) {
    double y = p[1] - std::clamp(p[1], -h, h);
    return std::sqrt(p[0] * p[0] + y * y + p[2] * p[2]) - r;
}

static double sd_superellipsoid(const Vec3& p, double r, double e) {
    double s = std::pow(std::abs(p[0]), e) + std::pow(std::abs(p[1]), e) + std::pow(std::abs(p[2]), e);
    return std::pow(s, 1.0 / e) - r;
}

double ProceduralSpec::evaluate(const Vec3& p) const {
    switch (kind) {
        case PrimitiveKind::sphere:
            return sd_sphere(p, params[0]);
        case PrimitiveKind::box:
            return sd_box(p, params[0], params[1], params[2]);
        case PrimitiveKind::torus:
            return sd_torus(p, params[0], params[1]);
        case PrimitiveKind::capsule:
            return sd_capsule(p, params[0], params[1]);
        case PrimitiveKind::superellipsoid:
            return sd_superellipsoid(p, params[0], params[1]);
        case PrimitiveKind::union_of_two: {
            Vec3 c1{params[1], params[2], params[3]};
            Vec3 c2{params[5], params[6], params[7]};
            return std::min(sd_sphere(p - c1, params[0]), sd_sphere(p - c2, params[4]));
        }
    }
    fail("invalid primitive kind");
}

ProceduralSpec ProceduralSpec::sample(PrimitiveKind kind, int class_id, RngStream& rng) {
    ProceduralSpec spec;
    spec.kind = kind;
    spec.class_id = class_id;
    switch (kind) {
        case PrimitiveKind::sphere:
            spec.params = {rng.uniform(0.15, 0.40)};
            break;
        case PrimitiveKind::box:
            spec.params = {rng.uniform(0.12, 0.38), rng.uniform(0.12, 0.38), rng.uniform(0.12, 0.38)};
            break;
        case PrimitiveKind::torus: {
            double R = rng.uniform(0.18, 0.33);
            double r = rng.uniform(0.04, std::min(0.12, 0.45 - R));
            spec.params = {R, r};
            break;
        }
        case PrimitiveKind::capsule: {
            double h = rng.uniform(0.10, 0.30);
            double r = rng.uniform(0.05, std::min(0.20, 0.45 - h));
            spec.params = {h, r};
            break;
        }
        case PrimitiveKind::superellipsoid:
            spec.params = {rng.uniform(0.15, 0.38), rng.uniform(2.0, 8.0)};
            break;
        case PrimitiveKind::union_of_two: {
            spec.params.resize(8);
            for (int s = 0; s < 2; ++s) {
                double r = rng.uniform(0.08, 0.22);
                double room = (0.45 - r) / std::sqrt(3.0);
                double lim = std::min(0.2, room);
                spec.params[s * 4] = r;
                for (int i = 1; i <= 3; ++i) spec.params[s * 4 + i] = rng.uniform(-lim, lim);
            }
            break;
        }
    }
    spec.validate();
    return spec;
}

DistanceGrid procedural_sdf(const ProceduralSpec& spec, int n, double tau) {
    spec.validate();
    require(n >= 8, "resolution must be >= 8, got ", n);
    DistanceGrid grid(n, tau);
    require(tau >= 2.0 * grid.spacing, "truncation ", tau, " below 2*spacing at n=", n);
    size_t idx = 0;
    for (int iz = 0; iz < n; ++iz) {
        for (int iy = 0; iy < n; ++iy) {
            for (int ix = 0; ix < n; ++ix, ++idx) {
                double d = spec.evaluate(grid.voxel_center(ix, iy, iz));
                grid.values[idx] = static_cast<float>(std::clamp(d, -tau, tau));
            }
        }
    }
    return grid;
}

} // namespace wag3d
