#pragma once

#include <array>
#include <vector>

#include "wag3d/geometry/grid.hpp"
#include "wag3d/wavelet/filter_bank.hpp"

namespace wag3d {

// Detail subbands are indexed by an axis bitmask: bit 0 = high-pass along x,
// bit 1 = along y, bit 2 = along z. subband_name maps the mask to the usual
// letter triple in (x, y, z) order, e.g. mask 4 -> "LLH".
const char* subband_name(int mask);
int subband_mask(const std::string& name);

// J-level separable decomposition of an n^3 grid (n divisible by 2^J).
// Level j holds its 7 detail bands at resolution n/2^j; level J is the
// coarsest and also carries the coarse band. In-memory coefficients are f64
// so the transform is exactly linear; the packed/persisted form is f32.
struct WaveletPyramid {
    int levels = 0;
    int base_n = 0;
    double truncation = 0.0;
    std::vector<double> coarse;                              // (n/2^J)^3
    std::vector<std::array<std::vector<double>, 7>> details; // [level-1][mask-1]
    int level_n(int level) const { return base_n >> level; }
    int coarse_n() const { return base_n >> levels; }

    void validate() const;
    double energy() const; // sum of squares over every stored coefficient
};

WaveletPyramid dwt3(const DistanceGrid& grid, const FilterBank& filters, int levels);

// Exact inverse when no coefficients were dropped. The output is not
// re-clamped; callers that need a valid truncated field clamp explicitly.
DistanceGrid idwt3(const WaveletPyramid& pyramid, const FilterBank& filters);

} // namespace wag3d
