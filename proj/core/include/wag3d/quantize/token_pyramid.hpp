#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wag3d/quantize/schedule.hpp"

namespace wag3d {

// Discrete code of one shape: per-scale integer maps over a shared
// vocabulary, x-fastest within each map.
struct TokenMapPyramid {
    std::vector<std::vector<int32_t>> maps;
    std::vector<std::array<int, 3>> scales;
    int64_t vocab = 0;

    int count() const { return static_cast<int>(maps.size()); }
    void validate() const;
    void validate_against(const ScaleSchedule& schedule) const;
    bool operator==(const TokenMapPyramid& o) const {
        return maps == o.maps && scales == o.scales && vocab == o.vocab;
    }
};

void save_w3tp(const std::string& path, const TokenMapPyramid& pyramid);
TokenMapPyramid load_w3tp(const std::string& path);

} // namespace wag3d
