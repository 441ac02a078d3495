#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace wag3d {

enum class InterpMode { trilinear, nearest };

// Ordered list of token-map resolutions (sx, sy, sz along x, y, z), coarsest
// first, last scale equal to the encoder's latent shape. Volumes must grow
// strictly except for repeats of the final scale at the tail.
struct ScaleSchedule {
    std::vector<std::array<int, 3>> scales;
    InterpMode interp = InterpMode::trilinear;

    int count() const { return static_cast<int>(scales.size()); }
    const std::array<int, 3>& at(int k) const { return scales[static_cast<size_t>(k - 1)]; } // 1-based
    const std::array<int, 3>& final_scale() const { return scales.back(); }
    int64_t flat_size(int k) const {
        const auto& s = at(k);
        return static_cast<int64_t>(s[0]) * s[1] * s[2];
    }
    int64_t total_tokens() const;

    void validate() const;

    // cubic schedule from a list of sides, e.g. {1,2,3,4}
    static ScaleSchedule cubic(const std::vector<int>& sides,
                               InterpMode interp = InterpMode::trilinear);
    std::string describe() const;
};

} // namespace wag3d
