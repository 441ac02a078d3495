#include "wag3d/geometry/grid.hpp"

#include <cmath>
#include <fstream>

#include "wag3d/common.hpp"
#include "wag3d/serial.hpp"

namespace wag3d {

static const char kGridMagic[4] = {'W', '3', 'D', 'G'};

DistanceGrid::DistanceGrid(int n_, double tau) : n(n_), spacing(1.0 / n_), truncation(tau) {
    require(n_ >= 1, "grid resolution must be positive, got ", n_);
    require(tau > 0.0, "truncation band must be positive, got ", tau);
    values.assign(static_cast<size_t>(n_) * n_ * n_, 0.0f);
}

void DistanceGrid::validate() const {
    require(n >= 1, "empty grid");
    require(values.size() == static_cast<size_t>(n) * n * n,
            "grid value count ", values.size(), " != n^3 for n=", n);
    require(truncation > 0.0, "truncation band must be positive");
    // f32 rounding of a value clamped at +-tau may overshoot by one ulp
    const double limit = truncation * (1.0 + 1e-6);
    for (float v : values) {
        require(std::isfinite(v), "non-finite grid value");
        require(std::abs(v) <= limit, "grid value ", v, " outside truncation band ", truncation);
    }
}

void save_w3dg(const std::string& path, const DistanceGrid& grid) {
    grid.validate();
    std::ofstream os(path, std::ios::binary);
    require(os.good(), "cannot open ", path, " for writing");
    serial::put_magic(os, kGridMagic);
    serial::put_u32(os, 1); // version
    serial::put_u32(os, static_cast<uint32_t>(grid.n));
    serial::put_f32(os, static_cast<float>(grid.truncation));
    serial::put_f32_array(os, grid.values);
    require(os.good(), "write failed for ", path);
}

DistanceGrid load_w3dg(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(is.good(), "cannot open ", path);
    serial::expect_magic(is, kGridMagic, "W3DG");
    uint32_t version = serial::get_u32(is);
    require(version == 1, "unsupported W3DG version ", version);
    uint32_t n = serial::get_u32(is);
    float tau = serial::get_f32(is);
    DistanceGrid grid(static_cast<int>(n), tau);
    serial::get_f32_array(is, grid.values, static_cast<size_t>(n) * n * n);
    grid.validate();
    return grid;
}

} // namespace wag3d
