#include <doctest.h>

#include <filesystem>

#include "wag3d/geometry/marching_cubes.hpp"
#include "wag3d/geometry/sample_points.hpp"
#include "wag3d/geometry/sdf.hpp"
#include "wag3d/geometry/voxelize.hpp"
#include "test_helpers.hpp"

using namespace wag3d;
using wag3d::testing::box_mesh;
using wag3d::testing::icosphere;

namespace {

ProceduralSpec sphere_spec(double r) { return {PrimitiveKind::sphere, {r}, 0}; }

} // namespace

TEST_CASE("procedural sphere values") {
    // center voxel of an odd grid sits at the origin
    ProceduralSpec s = sphere_spec(0.3);
    DistanceGrid g = procedural_sdf(s, 9, 0.35);
    CHECK(g.at(4, 4, 4) == doctest::Approx(-0.3).epsilon(1e-6));
    DistanceGrid clamped = procedural_sdf(s, 21, 0.1);
    CHECK(clamped.at(10, 10, 10) == doctest::Approx(-0.1).epsilon(1e-6));
    CHECK(s.evaluate({0.3, 0.0, 0.0}) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("procedural box distance") {
    ProceduralSpec b{PrimitiveKind::box, {0.2, 0.2, 0.2}, 0};
    CHECK(b.evaluate({0.4, 0.0, 0.0}) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(b.evaluate({0.0, 0.0, 0.0}) == doctest::Approx(-0.2).epsilon(1e-12));
}

TEST_CASE("unknown kind and bad parameters rejected") {
    CHECK_THROWS(primitive_kind_from_string("cone"));
    ProceduralSpec bad{PrimitiveKind::sphere, {0.9}, 0};
    CHECK_THROWS(procedural_sdf(bad, 16, 0.1));
    ProceduralSpec wrong_count{PrimitiveKind::torus, {0.2}, 0};
    CHECK_THROWS(procedural_sdf(wrong_count, 16, 0.1));
}

TEST_CASE("every procedural kind is 1-Lipschitz (eikonal bound)") {
    RngStream rng(101);
    for (PrimitiveKind kind :
         {PrimitiveKind::sphere, PrimitiveKind::box, PrimitiveKind::torus,
          PrimitiveKind::capsule, PrimitiveKind::superellipsoid, PrimitiveKind::union_of_two}) {
        ProceduralSpec spec = ProceduralSpec::sample(kind, 0, rng);
        for (int trial = 0; trial < 500; ++trial) {
            Vec3 p{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
            Vec3 q{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
            double lhs = std::abs(spec.evaluate(p) - spec.evaluate(q));
            CHECK(lhs <= dist(p, q) + 1e-12);
        }
    }
}

TEST_CASE("marching cubes on a sphere") {
    DistanceGrid g = procedural_sdf(sphere_spec(0.3), 64, 0.1);
    TriangleMesh mesh = marching_cubes(g, 0.0);
    REQUIRE(!mesh.faces.empty());

    // every vertex near the analytic radius
    for (const Vec3& v : mesh.vertices)
        CHECK(std::abs(norm(v) - 0.3) <= 1.5 * g.spacing);

    std::string why;
    CHECK(mesh.is_watertight(&why));
    CHECK(mesh.euler_characteristic() == 2);
}

TEST_CASE("marching cubes torus topology") {
    ProceduralSpec t{PrimitiveKind::torus, {0.28, 0.1}, 0};
    TriangleMesh mesh = marching_cubes(procedural_sdf(t, 64, 0.08), 0.0);
    std::string why;
    CHECK(mesh.is_watertight(&why));
    CHECK(mesh.euler_characteristic() == 0);
}

TEST_CASE("marching cubes rejects one-sided grids") {
    DistanceGrid g(16, 0.1);
    for (auto& v : g.values) v = 0.1f;
    CHECK_THROWS(marching_cubes(g, 0.0));
    CHECK_THROWS(marching_cubes(g, 0.2)); // iso outside the band
}

TEST_CASE("voxelize a cube mesh") {
    TriangleMesh cube = box_mesh(0.25, 0.25, 0.25);
    std::string why;
    REQUIRE(cube.is_watertight(&why));
    DistanceGrid g = voxelize_sdf(cube, 9, 0.3);
    CHECK(g.at(4, 4, 4) == doctest::Approx(-0.25).epsilon(1e-5));
    // far corner voxel is clamped to exactly +tau
    CHECK(g.at(0, 0, 0) == static_cast<float>(0.3));
}

TEST_CASE("voxelize matches the analytic sphere") {
    TriangleMesh ico = icosphere(0.3, 3);
    DistanceGrid from_mesh = voxelize_sdf(ico, 32, 0.1);
    DistanceGrid analytic = procedural_sdf(sphere_spec(0.3), 32, 0.1);
    double max_err = 0.0;
    for (size_t i = 0; i < from_mesh.values.size(); ++i)
        max_err = std::max(max_err,
                           std::abs(static_cast<double>(from_mesh.values[i]) - analytic.values[i]));
    CHECK(max_err <= 2.0 * analytic.spacing);
}

TEST_CASE("voxelize rejects non-watertight meshes") {
    TriangleMesh open_box = box_mesh(0.25, 0.25, 0.25);
    open_box.faces.pop_back();
    CHECK_THROWS_WITH_AS(voxelize_sdf(open_box, 16, 0.1),
                         doctest::Contains("non-watertight"), Error);
}

TEST_CASE("marching cubes then voxelize reproduces the grid") {
    RngStream rng(77);
    std::vector<ProceduralSpec> specs = {
        sphere_spec(0.3),
        {PrimitiveKind::box, {0.25, 0.2, 0.3}, 0},
        {PrimitiveKind::torus, {0.28, 0.1}, 0},
        {PrimitiveKind::capsule, {0.2, 0.12}, 0},
    };
    for (const auto& spec : specs) {
        DistanceGrid g = procedural_sdf(spec, 32, 0.1);
        TriangleMesh mesh = marching_cubes(g, 0.0);
        DistanceGrid back = voxelize_sdf(mesh, 32, 0.1);
        double worst = 0.0;
        for (int iz = 0; iz < g.n; ++iz)
            for (int iy = 0; iy < g.n; ++iy)
                for (int ix = 0; ix < g.n; ++ix) {
                    double orig = g.at(ix, iy, iz);
                    if (std::abs(orig) >= 0.95 * g.truncation) continue; // clamped region
                    worst = std::max(worst, std::abs(orig - back.at(ix, iy, iz)));
                }
        CHECK(worst <= 3.0 * g.spacing);
    }
}

TEST_CASE("surface sampling stays on a single triangle") {
    TriangleMesh tri{{{0, 0, 0}, {0.4, 0, 0}, {0, 0.4, 0}}, {{0, 1, 2}}};
    PointCloud cloud = sample_surface_points(tri, 1000, 5);
    for (const Vec3& p : cloud.points) {
        CHECK(p[2] == doctest::Approx(0.0));
        CHECK(p[0] >= -1e-12);
        CHECK(p[1] >= -1e-12);
        CHECK(p[0] / 0.4 + p[1] / 0.4 <= 1.0 + 1e-12);
    }
}

TEST_CASE("area-uniform sampling across two triangles") {
    // areas 3A and A in the z=0 plane
    TriangleMesh two{{{0, 0, 0}, {0.3, 0, 0}, {0, 0.3, 0}, {-0.45, 0, 0}, {0, -0.3, 0}},
                     {{0, 3, 4}, {0, 1, 2}}};
    double a_small = 0.5 * 0.3 * 0.3;
    double a_large = 0.5 * 0.45 * 0.3;
    CHECK(a_large / a_small == doctest::Approx(1.5));

    const int m = 40000;
    PointCloud cloud = sample_surface_points(two, m, 11);
    int large_count = 0;
    for (const Vec3& p : cloud.points)
        if (p[0] < 0 || p[1] < 0) ++large_count;
    double pl = a_large / (a_large + a_small);
    double sigma = std::sqrt(m * pl * (1 - pl));
    CHECK(std::abs(large_count - m * pl) <= 3.0 * sigma);
}

TEST_CASE("sampling determinism and face-order invariance") {
    TriangleMesh mesh = icosphere(0.3, 1);
    PointCloud a = sample_surface_points(mesh, 500, 42);
    PointCloud b = sample_surface_points(mesh, 500, 42);
    CHECK(a.points == b.points);

    TriangleMesh permuted = mesh;
    std::reverse(permuted.faces.begin(), permuted.faces.end());
    PointCloud c = sample_surface_points(permuted, 500, 42);
    CHECK(a.points == c.points);

    PointCloud d = sample_surface_points(mesh, 500, 43);
    CHECK(a.points != d.points);
}

TEST_CASE("degenerate mesh rejected for sampling") {
    TriangleMesh flat{{{0, 0, 0}, {0.1, 0, 0}, {0.2, 0, 0}}, {{0, 1, 2}}};
    CHECK_THROWS(sample_surface_points(flat, 10, 1));
}

TEST_CASE("OBJ round trip") {
    namespace fs = std::filesystem;
    TriangleMesh mesh = icosphere(0.25, 1);
    fs::path path = fs::temp_directory_path() / "wag3d_test_mesh.obj";
    save_obj(path.string(), mesh);
    TriangleMesh back = load_obj(path.string());
    REQUIRE(back.vertices.size() == mesh.vertices.size());
    REQUIRE(back.faces == mesh.faces);
    for (size_t i = 0; i < mesh.vertices.size(); ++i)
        CHECK(dist(back.vertices[i], mesh.vertices[i]) < 1e-8);
    fs::remove(path);
}

TEST_CASE("W3DG round trip is exact") {
    namespace fs = std::filesystem;
    RngStream rng(3);
    DistanceGrid g = wag3d::testing::random_grid(16, 0.1, rng);
    fs::path path = fs::temp_directory_path() / "wag3d_test_grid.w3dg";
    save_w3dg(path.string(), g);
    DistanceGrid back = load_w3dg(path.string());
    CHECK(back.n == g.n);
    CHECK(back.truncation == doctest::Approx(g.truncation));
    CHECK(back.values == g.values);
    fs::remove(path);
}
